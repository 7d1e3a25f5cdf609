//! Built-in example generators, each emitting a ready-to-run spec document.

use num::rational::BigRational;

use wco::scalar::Scalar;

use crate::schema::{SpecDocument, TailMapDocument};
use crate::CliError;

pub struct ExampleParams {
    /// Multiplier for `constant-mult` (a rational literal).
    pub c: Option<String>,
    /// Size for `dirichlet`.
    pub n: Option<usize>,
    /// Tail mass ratio for `star-tail` (a rational literal).
    pub rho: Option<String>,
    /// Tail weight coefficient for `star-tail` (a rational literal).
    pub beta: Option<String>,
}

pub fn generate(name: &str, params: &ExampleParams) -> Result<SpecDocument, CliError> {
    match name {
        "identity" => Ok(SpecDocument::finite(
            vec!["1", "1", "1"],
            vec![0, 1, 2],
            vec!["1", "1", "1"],
            "rational",
        )),
        "two-cycle" => Ok(SpecDocument::finite(
            vec!["1", "1"],
            vec![1, 0],
            vec!["1", "1"],
            "rational",
        )),
        "constant-mult" => {
            let c = params.c.as_deref().unwrap_or("1");
            let c: BigRational = Scalar::parse_literal(c)
                .map_err(|bad| CliError::input(format!("--c `{bad}` is not a rational literal")))?;
            let usq = (c.clone() * c).render();
            Ok(SpecDocument::finite_owned(
                vec!["1".into()],
                vec![0],
                vec![usq],
                "rational",
            ))
        }
        "dirichlet" => {
            let n = params.n.unwrap_or(8);
            if n < 2 {
                return Err(CliError::input("--n must be at least 2 for dirichlet"));
            }
            let masses = vec!["1".to_owned(); n];
            let phi: Vec<usize> = (0..n).map(|k| k.saturating_sub(1)).collect();
            let usq: Vec<String> = (0..n)
                .map(|k| {
                    if k == 0 {
                        "0".to_owned()
                    } else {
                        format!("{}/{}", k + 1, k)
                    }
                })
                .collect();
            Ok(SpecDocument::finite_owned(masses, phi, usq, "rational"))
        }
        "star-tail" => {
            let rho = params.rho.as_deref().unwrap_or("1");
            let beta = params.beta.as_deref().unwrap_or("1");
            let _: BigRational = Scalar::parse_literal(rho).map_err(|bad| {
                CliError::input(format!("--rho `{bad}` is not a rational literal"))
            })?;
            let _: BigRational = Scalar::parse_literal(beta).map_err(|bad| {
                CliError::input(format!("--beta `{bad}` is not a rational literal"))
            })?;
            Ok(SpecDocument::geometric_tail(
                vec!["1".into()],
                vec![0],
                vec!["0".into()],
                ("1".into(), rho.into()),
                (beta.into(), "1".into()),
                TailMapDocument::Constant { c: 0 },
            ))
        }
        other => Err(CliError::unknown_example(other)),
    }
}
