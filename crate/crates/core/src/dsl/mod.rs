//! Line-oriented circuit description format (`.qcx`).
//!
//! ```text
//! version 1
//! system photon
//! source entangled p=0.70710678 q=0.70710678 alpha=0
//! side A {
//!   bs t=0.70710678
//! }
//! side B {
//!   bs t=0.70710678
//! }
//! sweep w
//! ```

mod config;
mod parser;
mod serialize;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use config::{
    CircuitConfig, ElementDecl, PlateAmplitude, SamplerDecl, Side, SourceDecl, SweepDecl, SweepVariable, System,
};
pub use parser::{parse, parse_bytes, parse_with_warnings};
pub use serialize::serialize;
pub use validate::{validate, Finding, Severity, Target, INPUT_NORM_TOL, MIN_SWEEP_POINTS};

/// A positioned message; `line` and `column` are 1-based, columns count chars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {level}: {}", self.line, self.column, self.message)
    }
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const RTO: &str = "\
# minimal RTO
system photon
source entangled p=0.70710678 q=0.70710678 alpha=0
side A {
  bs t=0.70710678
}
side B {
  bs t=0.70710678
}
sweep w
";

    fn errors(text: &str) -> Vec<ParseDiagnostic> {
        parse(text).expect_err("expected diagnostics")
    }

    #[test]
    fn parses_minimal_rto() {
        let c = parse(RTO).unwrap();
        assert_eq!(c.system, System::Photon);
        assert_eq!(
            c.source,
            SourceDecl::Entangled {
                p: 0.70710678,
                q: 0.70710678,
                alpha: 0.0
            }
        );
        assert_eq!(c.side_a, vec![ElementDecl::splitter(0.70710678)]);
        assert_eq!(c.side_b, c.side_a);
        assert_eq!(
            c.sweep,
            Some(SweepDecl {
                variable: SweepVariable::W,
                points: 361
            })
        );
        assert!(validate(&c).is_empty());
    }

    #[test]
    fn crlf_matches_lf() {
        assert_eq!(parse(&RTO.replace('\n', "\r\n")).unwrap(), parse(RTO).unwrap());
    }

    #[test]
    fn element_after_beam_splitter() {
        let text = RTO.replace("  bs t=0.70710678\n}\nside B", "  bs t=0.8\n  ap T1=0.9 T2=0.3\n}\nside B");
        let d = errors(&text);
        assert_eq!(d.len(), 1, "{d:?}");
        assert!(d[0].message.contains("element after beam splitter"));
        assert_eq!((d[0].line, d[0].column), (6, 3));
    }

    #[test]
    fn source_not_normalized_reports_sum() {
        let text = RTO.replace("p=0.70710678 q=0.70710678", "p=0.9 q=0.9");
        let d = errors(&text);
        assert_eq!(d.len(), 1, "{d:?}");
        assert!(d[0].message.contains("source not normalized"));
        assert!(d[0].message.contains("1.62"));
        assert_eq!(d[0].line, 3);
    }

    #[test]
    fn bs_phase_violation_and_gain() {
        let text = RTO
            .replace("bs t=0.70710678\n}\nside B", "bs t=0.70710678 tau=0.1\n}\nside B")
            .replace("sweep w", "side C {\n}\n");
        let d = errors(&text);
        assert!(d.iter().any(|d| d.message.contains("unknown side")));
        assert!(d.iter().any(|d| d.message.contains("tau + tau_p - rho - rho_p = pi")));

        let text = RTO.replace("  bs t=0.70710678\n}\nside B", "  ap T1=1.2 T2=0.3\n  bs t=0.7\n}\nside B");
        let d = errors(&text);
        assert!(d.iter().any(|d| d.message.contains("unphysical gain")));
    }

    #[test]
    fn collects_all_errors() {
        let text = "system boson\nsource entangled p=x q=0.5 zeta=1\nfoo\n}\n";
        let d = errors(text);
        assert!(d.len() >= 4, "{d:?}");
        assert!(d.iter().any(|d| d.message.contains("unknown system")));
        assert!(d.iter().any(|d| d.message.contains("unknown key `zeta`")));
        assert!(d.iter().any(|d| d.message.contains("unknown statement `foo`")));
        assert!(d.iter().any(|d| d.message.contains("missing `system`")));
    }

    #[test]
    fn positions_index_into_text() {
        let text = "system photon\nsource entangled p=0.6 q=0.8 alpha=zz\n";
        let d = errors(text);
        let lines: Vec<&str> = text.split('\n').collect();
        for diag in &d {
            let line = lines[diag.line - 1];
            assert!(diag.column <= line.chars().count() + 1);
        }
        let alpha = d.iter().find(|d| d.message.contains("alpha")).unwrap();
        assert_eq!(alpha.column, 36);
    }

    #[test]
    fn version_warning() {
        let text = format!("{RTO}version 1\n");
        let (_, warnings) = parse_with_warnings(&text).unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].severity, Severity::Warning);
        assert!(errors(&format!("version 2\n{RTO}"))[0].message.contains("unsupported version"));
    }

    #[test]
    fn serialize_drops_comments_keeps_values() {
        let c = parse(RTO).unwrap();
        let text = serialize(&c);
        assert!(!text.contains('#'));
        assert!(!text.contains('\r'));
        assert_eq!(parse(&text).unwrap(), c);
        assert_eq!(serialize(&parse(&text).unwrap()), text);
    }

    #[test]
    fn fermion_roundtrip_with_pi_literals() {
        let text = "system fermion\nsource plates T1=0.9@0.5pi T2=0.3\nside A {\n  bloch chi=0.5pi delta=pi\n}\nside B {\n  bloch chi=0.25pi\n}\nsample n=100 seed=7\n";
        let c = parse(text).unwrap();
        assert_eq!(
            c.side_a,
            vec![ElementDecl::Bloch {
                chi: 0.5 * PI,
                delta: PI
            }]
        );
        assert_eq!(parse(&serialize(&c)).unwrap(), c);
    }

    #[test]
    fn invalid_utf8_is_a_diagnostic() {
        let d = parse_bytes(b"system photon\nsource \xff").unwrap_err();
        assert_eq!((d[0].line, d[0].column), (2, 8));
    }
}
