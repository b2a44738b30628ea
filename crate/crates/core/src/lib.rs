pub mod analysis;
pub mod backend;
pub mod corpus;
pub mod exec;
pub mod lang;
pub mod pipeline;
pub mod process;
pub mod prompt;
pub mod rectify;
pub mod report;
pub mod taxonomy;
