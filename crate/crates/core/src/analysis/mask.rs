//! Blanks out comments and string-literal contents while preserving byte
//! offsets, so structural scans never match inside text.

use crate::lang::Language;

/// Returns a copy of `code` where comment bytes and the bytes between string
/// or char quotes are replaced by ASCII spaces. Newlines and quote characters
/// are kept, so line numbers and byte offsets line up with the original.
pub fn mask(code: &str, lang: Language) -> String {
    match lang {
        Language::Python => mask_python(code),
        Language::Cpp | Language::Java => mask_c_family(code),
    }
}

fn blank(b: u8) -> u8 {
    if b == b'\n' {
        b'\n'
    } else {
        b' '
    }
}

fn mask_c_family(code: &str) -> String {
    let src = code.as_bytes();
    let mut out = src.to_vec();
    let mut i = 0;
    while i < src.len() {
        match src[i] {
            b'/' if src.get(i + 1) == Some(&b'/') => {
                while i < src.len() && src[i] != b'\n' {
                    out[i] = b' ';
                    i += 1;
                }
            }
            b'/' if src.get(i + 1) == Some(&b'*') => {
                out[i] = b' ';
                out[i + 1] = b' ';
                i += 2;
                while i < src.len() && !(src[i] == b'*' && src.get(i + 1) == Some(&b'/')) {
                    out[i] = blank(src[i]);
                    i += 1;
                }
                if i < src.len() {
                    out[i] = b' ';
                    out[i + 1] = b' ';
                    i += 2;
                }
            }
            q @ (b'"' | b'\'') => {
                i += 1;
                while i < src.len() && src[i] != q && src[i] != b'\n' {
                    if src[i] == b'\\' && i + 1 < src.len() {
                        out[i] = b' ';
                        i += 1;
                    }
                    out[i] = blank(src[i]);
                    i += 1;
                }
                i += 1;
            }
            _ => i += 1,
        }
    }
    // only ASCII bytes were written over whole characters' bytes
    String::from_utf8(out).unwrap_or_else(|e| String::from_utf8_lossy(e.as_bytes()).into_owned())
}

fn mask_python(code: &str) -> String {
    let src = code.as_bytes();
    let mut out = src.to_vec();
    let mut i = 0;
    while i < src.len() {
        match src[i] {
            b'#' => {
                while i < src.len() && src[i] != b'\n' {
                    out[i] = b' ';
                    i += 1;
                }
            }
            q @ (b'"' | b'\'') => {
                let triple = src.get(i + 1) == Some(&q) && src.get(i + 2) == Some(&q);
                if triple {
                    i += 3;
                    while i < src.len() && !(src[i] == q && src.get(i + 1) == Some(&q) && src.get(i + 2) == Some(&q)) {
                        if src[i] == b'\\' && i + 1 < src.len() {
                            out[i] = b' ';
                            i += 1;
                        }
                        out[i] = blank(src[i]);
                        i += 1;
                    }
                    i += 3;
                } else {
                    i += 1;
                    while i < src.len() && src[i] != q && src[i] != b'\n' {
                        if src[i] == b'\\' && i + 1 < src.len() {
                            out[i] = b' ';
                            i += 1;
                        }
                        out[i] = blank(src[i]);
                        i += 1;
                    }
                    i += 1;
                }
            }
            _ => i += 1,
        }
    }
    String::from_utf8(out).unwrap_or_else(|e| String::from_utf8_lossy(e.as_bytes()).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_java_strings_and_comments() {
        let code = "int a = 1; // for else\nString s = \"} else {\"; /* x\ny */ char c = '\\'';";
        let m = mask(code, Language::Java);
        assert_eq!(m.len(), code.len());
        assert!(!m.contains("else"));
        assert_eq!(m.matches('\n').count(), 2);
        assert!(m.contains("char c = '  ';"));
    }

    #[test]
    fn masks_python_triple_quotes() {
        let code = "x = '''a / b\n'''\ny = a / b # c / d\n";
        let m = mask(code, Language::Python);
        assert_eq!(m.matches('/').count(), 1);
        assert_eq!(m.len(), code.len());
    }

    #[test]
    fn multibyte_content_keeps_offsets() {
        let code = "print(\"héllo\") # ñ";
        let m = mask(code, Language::Python);
        assert_eq!(m.len(), code.len());
        assert!(m.starts_with("print(\""));
    }
}
