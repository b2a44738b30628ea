//! Which standard-library import provides a given symbol, per language.

use crate::lang::Language;

/// How to make a symbol resolvable in a target language.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum StdImport {
    /// `import java.util.Scanner;`
    JavaClass(&'static str),
    /// `import math`
    PyModule(&'static str),
    /// `from collections import deque`
    PyFrom { module: &'static str, name: &'static str },
    /// `#include <vector>`; `std` tells whether the symbol lives in namespace std.
    CppHeader { header: &'static str, std: bool },
}

const JAVA: &[(&str, &str)] = &[
    ("Scanner", "java.util.Scanner"),
    ("ArrayList", "java.util.ArrayList"),
    ("List", "java.util.List"),
    ("LinkedList", "java.util.LinkedList"),
    ("Map", "java.util.Map"),
    ("HashMap", "java.util.HashMap"),
    ("TreeMap", "java.util.TreeMap"),
    ("LinkedHashMap", "java.util.LinkedHashMap"),
    ("Set", "java.util.Set"),
    ("HashSet", "java.util.HashSet"),
    ("TreeSet", "java.util.TreeSet"),
    ("LinkedHashSet", "java.util.LinkedHashSet"),
    ("Deque", "java.util.Deque"),
    ("ArrayDeque", "java.util.ArrayDeque"),
    ("Queue", "java.util.Queue"),
    ("PriorityQueue", "java.util.PriorityQueue"),
    ("Stack", "java.util.Stack"),
    ("Arrays", "java.util.Arrays"),
    ("Collections", "java.util.Collections"),
    ("Iterator", "java.util.Iterator"),
    ("StringTokenizer", "java.util.StringTokenizer"),
    ("Objects", "java.util.Objects"),
    ("Optional", "java.util.Optional"),
    ("Comparator", "java.util.Comparator"),
    ("BufferedReader", "java.io.BufferedReader"),
    ("InputStreamReader", "java.io.InputStreamReader"),
    ("IOException", "java.io.IOException"),
    ("PrintWriter", "java.io.PrintWriter"),
    ("BufferedWriter", "java.io.BufferedWriter"),
    ("OutputStreamWriter", "java.io.OutputStreamWriter"),
    ("InputStream", "java.io.InputStream"),
    ("BigInteger", "java.math.BigInteger"),
    ("BigDecimal", "java.math.BigDecimal"),
    ("Collectors", "java.util.stream.Collectors"),
    ("IntStream", "java.util.stream.IntStream"),
    ("Stream", "java.util.stream.Stream"),
];

const PY_MODULES: &[&str] = &[
    "math", "sys", "collections", "itertools", "heapq", "bisect", "re", "functools", "string", "random", "os",
    "copy", "decimal", "fractions", "operator", "statistics",
];

const PY_NAMES: &[(&str, &str)] = &[
    ("deque", "collections"),
    ("defaultdict", "collections"),
    ("Counter", "collections"),
    ("OrderedDict", "collections"),
    ("gcd", "math"),
    ("sqrt", "math"),
    ("ceil", "math"),
    ("floor", "math"),
    ("factorial", "math"),
    ("comb", "math"),
    ("inf", "math"),
    ("pi", "math"),
    ("log", "math"),
    ("reduce", "functools"),
    ("lru_cache", "functools"),
    ("cmp_to_key", "functools"),
    ("permutations", "itertools"),
    ("combinations", "itertools"),
    ("product", "itertools"),
    ("accumulate", "itertools"),
    ("heappush", "heapq"),
    ("heappop", "heapq"),
    ("heapify", "heapq"),
    ("bisect_left", "bisect"),
    ("bisect_right", "bisect"),
    ("insort", "bisect"),
    ("stdin", "sys"),
    ("setrecursionlimit", "sys"),
];

const CPP: &[(&str, &str, bool)] = &[
    ("cout", "iostream", true),
    ("cin", "iostream", true),
    ("cerr", "iostream", true),
    ("endl", "iostream", true),
    ("ios", "iostream", true),
    ("string", "string", true),
    ("getline", "string", true),
    ("to_string", "string", true),
    ("stoi", "string", true),
    ("stoll", "string", true),
    ("vector", "vector", true),
    ("map", "map", true),
    ("multimap", "map", true),
    ("set", "set", true),
    ("multiset", "set", true),
    ("unordered_map", "unordered_map", true),
    ("unordered_set", "unordered_set", true),
    ("queue", "queue", true),
    ("priority_queue", "queue", true),
    ("stack", "stack", true),
    ("deque", "deque", true),
    ("pair", "utility", true),
    ("make_pair", "utility", true),
    ("swap", "utility", true),
    ("sort", "algorithm", true),
    ("reverse", "algorithm", true),
    ("min", "algorithm", true),
    ("max", "algorithm", true),
    ("min_element", "algorithm", true),
    ("max_element", "algorithm", true),
    ("lower_bound", "algorithm", true),
    ("upper_bound", "algorithm", true),
    ("unique", "algorithm", true),
    ("fill", "algorithm", true),
    ("next_permutation", "algorithm", true),
    ("accumulate", "numeric", true),
    ("iota", "numeric", true),
    ("gcd", "numeric", true),
    ("sqrt", "cmath", false),
    ("pow", "cmath", false),
    ("floor", "cmath", false),
    ("ceil", "cmath", false),
    ("fabs", "cmath", false),
    ("printf", "cstdio", false),
    ("scanf", "cstdio", false),
    ("puts", "cstdio", false),
    ("memset", "cstring", false),
    ("strlen", "cstring", false),
    ("setprecision", "iomanip", true),
    ("setw", "iomanip", true),
    ("fixed", "iostream", true),
    ("int64_t", "cstdint", false),
    ("uint64_t", "cstdint", false),
    ("INT_MAX", "climits", false),
    ("INT_MIN", "climits", false),
    ("LLONG_MAX", "climits", false),
    ("numeric_limits", "limits", true),
    ("bitset", "bitset", true),
    ("stringstream", "sstream", true),
    ("istringstream", "sstream", true),
    ("tuple", "tuple", true),
    ("make_tuple", "tuple", true),
    ("tie", "tuple", true),
    ("function", "functional", true),
];

/// The standard import that defines `symbol` in `lang`, if known.
pub fn std_import(lang: Language, symbol: &str) -> Option<StdImport> {
    match lang {
        Language::Java => JAVA
            .iter()
            .find(|(s, _)| *s == symbol)
            .map(|(_, fq)| StdImport::JavaClass(fq)),
        Language::Python => {
            if let Some(m) = PY_MODULES.iter().find(|m| **m == symbol) {
                return Some(StdImport::PyModule(m));
            }
            PY_NAMES
                .iter()
                .find(|(n, _)| *n == symbol)
                .map(|(n, m)| StdImport::PyFrom { module: m, name: n })
        }
        Language::Cpp => CPP
            .iter()
            .find(|(s, _, _)| *s == symbol)
            .map(|(_, h, std)| StdImport::CppHeader { header: h, std: *std }),
    }
}

/// All Java class names in the table; used to spot unimported uses in code.
pub fn java_known_classes() -> impl Iterator<Item = &'static str> {
    JAVA.iter().map(|(s, _)| *s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        assert_eq!(std_import(Language::Java, "Scanner"), Some(StdImport::JavaClass("java.util.Scanner")));
        assert_eq!(std_import(Language::Python, "math"), Some(StdImport::PyModule("math")));
        assert_eq!(
            std_import(Language::Python, "deque"),
            Some(StdImport::PyFrom { module: "collections", name: "deque" })
        );
        assert_eq!(
            std_import(Language::Cpp, "vector"),
            Some(StdImport::CppHeader { header: "vector", std: true })
        );
        assert_eq!(std_import(Language::Java, "Foo"), None);
    }
}
