use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MultipartiteState;
use crate::error::{QcorrError, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::{re, Real, C};

/// Named three-qubit families. Parameters are squared-amplitude or mixing
/// weights in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `(|000⟩+|111⟩)/√2`
    Ghz,
    /// `√p|000⟩ + √(1-p)|111⟩`
    GhzGeneral,
    /// `√p|000⟩ + √(1-p)|+11⟩`
    GhzPlus,
    /// `√p|000⟩ + √(1-p)|-11⟩`
    GhzMinus,
    /// `(|001⟩+|010⟩+|100⟩)/√3`
    W,
    /// `α|001⟩ + β|010⟩ + γ|100⟩`, params `alpha2, beta2, gamma2`, or a
    /// single `p` meaning `α² = p, β² = γ² = (1-p)/2`.
    WGeneral,
    /// `(1-p)|W⟩⟨W| + p I/8`
    WWhite,
    /// `(1-p)|GHZ⟩⟨GHZ| + p I/8`
    GhzWhite,
    /// `(1-p)|W⟩⟨W| + (p/2)(|000⟩⟨000| + |1+1⟩⟨1+1|)`
    WAsym,
    /// `p|000⟩⟨000| + (1-p)|1+1⟩⟨1+1|`
    Counterexample,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::Ghz,
        Family::GhzGeneral,
        Family::GhzPlus,
        Family::GhzMinus,
        Family::W,
        Family::WGeneral,
        Family::WWhite,
        Family::GhzWhite,
        Family::WAsym,
        Family::Counterexample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ghz => "ghz",
            Family::GhzGeneral => "ghz_general",
            Family::GhzPlus => "ghz_plus",
            Family::GhzMinus => "ghz_minus",
            Family::W => "w",
            Family::WGeneral => "w_general",
            Family::WWhite => "w_white",
            Family::GhzWhite => "ghz_white",
            Family::WAsym => "w_asym",
            Family::Counterexample => "counterexample",
        }
    }

    /// Families driven by one real parameter `p`.
    pub fn is_single_parameter(self) -> bool {
        !matches!(self, Family::Ghz | Family::W)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = QcorrError;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| QcorrError::Param(format!("unknown family {s:?}")))
    }
}

/// A family plus the parameters it was instantiated with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl FamilySpec {
    pub fn new(family: Family, params: BTreeMap<String, f64>) -> Self {
        Self { family, params }
    }

    pub fn with_p(family: Family, p: f64) -> Self {
        Self::new(family, BTreeMap::from([("p".to_string(), p)]))
    }

    pub fn p(&self) -> Option<f64> {
        self.params.get("p").copied()
    }

    /// `(α², β², γ²)` for the W families, `None` otherwise.
    pub fn w_weights(&self) -> Option<(f64, f64, f64)> {
        match self.family {
            Family::W => Some((1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)),
            Family::WGeneral => match self.p() {
                Some(p) => Some((p, (1.0 - p) / 2.0, (1.0 - p) / 2.0)),
                None => Some((
                    *self.params.get("alpha2")?,
                    *self.params.get("beta2")?,
                    *self.params.get("gamma2")?,
                )),
            },
            _ => None,
        }
    }

    pub fn build<T: Real>(&self) -> Result<MultipartiteState<T>> {
        named_state(self.family.name(), &self.params)
    }
}

fn weight(params: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    let v = *params
        .get(key)
        .ok_or_else(|| QcorrError::Param(format!("missing parameter {key:?}")))?;
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(QcorrError::Param(format!("{key} = {v} outside [0, 1]")));
    }
    Ok(v)
}

fn only_keys(params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(QcorrError::Param(format!("unexpected parameter {k:?}"))),
        None => Ok(()),
    }
}

fn basis_vector<T: Real>(amps: &[(usize, T)]) -> Vec<C<T>> {
    let mut v = vec![re(T::zero()); 8];
    for &(i, a) in amps {
        v[i] = v[i] + re(a);
    }
    v
}

fn w_vector<T: Real>(a2: f64, b2: f64, g2: f64) -> Vec<C<T>> {
    basis_vector(&[
        (0b001, T::of(a2.sqrt())),
        (0b010, T::of(b2.sqrt())),
        (0b100, T::of(g2.sqrt())),
    ])
}

fn one_plus_one<T: Real>() -> Vec<C<T>> {
    let s = T::of(0.5f64.sqrt());
    basis_vector(&[(0b101, s), (0b111, s)])
}

fn mix<T: Real>(terms: &[(f64, &ComplexMatrix<T>)]) -> ComplexMatrix<T> {
    let mut out = ComplexMatrix::zeros(8, 8);
    for (w, m) in terms {
        out = &out + &m.scale_real(T::of(*w));
    }
    out
}

/// Builds a named three-qubit state. Families without parameters accept an
/// empty map; single-parameter families read `p`.
pub fn named_state<T: Real>(
    family: &str,
    params: &BTreeMap<String, f64>,
) -> Result<MultipartiteState<T>> {
    let fam: Family = family.parse()?;
    let dims = vec![2, 2, 2];
    let h = T::of(0.5f64.sqrt());
    let pure = |v: Vec<C<T>>| MultipartiteState::from_pure(dims.clone(), &v, None);
    let state = match fam {
        Family::Ghz => {
            only_keys(params, &[])?;
            pure(basis_vector(&[(0, h), (7, h)]))?
        }
        Family::GhzGeneral => {
            only_keys(params, &["p"])?;
            let p = weight(params, "p")?;
            pure(basis_vector(&[(0, T::of(p.sqrt())), (7, T::of((1.0 - p).sqrt()))]))?
        }
        Family::GhzPlus | Family::GhzMinus => {
            only_keys(params, &["p"])?;
            let p = weight(params, "p")?;
            let q = T::of((1.0 - p).sqrt()) * h;
            let sign = if fam == Family::GhzPlus { T::one() } else { -T::one() };
            pure(basis_vector(&[(0, T::of(p.sqrt())), (0b011, q), (0b111, sign * q)]))?
        }
        Family::W => {
            only_keys(params, &[])?;
            pure(w_vector(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0))?
        }
        Family::WGeneral => {
            let (a2, b2, g2) = if params.contains_key("p") {
                only_keys(params, &["p"])?;
                let p = weight(params, "p")?;
                (p, (1.0 - p) / 2.0, (1.0 - p) / 2.0)
            } else {
                only_keys(params, &["alpha2", "beta2", "gamma2"])?;
                let w = (
                    weight(params, "alpha2")?,
                    weight(params, "beta2")?,
                    weight(params, "gamma2")?,
                );
                if (w.0 + w.1 + w.2 - 1.0).abs() > 1e-9 {
                    return Err(QcorrError::Param(format!(
                        "alpha2 + beta2 + gamma2 = {}, expected 1",
                        w.0 + w.1 + w.2
                    )));
                }
                w
            };
            pure(w_vector(a2, b2, g2))?
        }
        Family::WWhite | Family::GhzWhite => {
            only_keys(params, &["p"])?;
            let p = weight(params, "p")?;
            let v = if fam == Family::WWhite {
                w_vector(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
            } else {
                basis_vector(&[(0, h), (7, h)])
            };
            let rho = mix(&[
                (1.0 - p, &ComplexMatrix::outer(&v)),
                (p / 8.0, &ComplexMatrix::identity(8)),
            ]);
            MultipartiteState::new(dims, rho, None)?
        }
        Family::WAsym => {
            only_keys(params, &["p"])?;
            let p = weight(params, "p")?;
            let rho = mix(&[
                (1.0 - p, &ComplexMatrix::outer(&w_vector(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0))),
                (p / 2.0, &ComplexMatrix::outer(&basis_vector(&[(0, T::one())]))),
                (p / 2.0, &ComplexMatrix::outer(&one_plus_one())),
            ]);
            MultipartiteState::new(dims, rho, None)?
        }
        Family::Counterexample => {
            only_keys(params, &["p"])?;
            let p = weight(params, "p")?;
            let rho = mix(&[
                (p, &ComplexMatrix::outer(&basis_vector(&[(0, T::one())]))),
                (1.0 - p, &ComplexMatrix::outer(&one_plus_one())),
            ]);
            MultipartiteState::new(dims, rho, None)?
        }
    };
    let fam_spec = FamilySpec::new(fam, params.clone());
    let label = if params.is_empty() {
        fam.name().to_string()
    } else {
        let kv: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", fam.name(), kv.join(","))
    };
    Ok(state.with_label(label).with_origin(fam_spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, purity};

    fn p(v: f64) -> BTreeMap<String, f64> {
        BTreeMap::from([("p".to_string(), v)])
    }

    #[test]
    fn ghz_density_matrix() {
        let s = named_state::<f64>("ghz", &BTreeMap::new()).unwrap();
        for (i, j) in [(0, 0), (0, 7), (7, 0), (7, 7)] {
            assert!((s.rho()[(i, j)].re - 0.5).abs() < 1e-15);
        }
        assert!((s.rho().trace().re - 1.0).abs() < 1e-15);
        assert_eq!(s.label(), Some("ghz"));
    }

    #[test]
    fn white_noise_limits() {
        let w = named_state::<f64>("w", &BTreeMap::new()).unwrap();
        let w0 = named_state::<f64>("w_white", &p(0.0)).unwrap();
        assert_eq!(w0.rho(), w.rho());
        let w1 = named_state::<f64>("w_white", &p(1.0)).unwrap();
        assert!(w1.rho().max_abs_diff(&ComplexMatrix::identity(8).scale_real(0.125)) < 1e-15);
    }

    #[test]
    fn counterexample_purity() {
        let s = named_state::<f64>("counterexample", &p(0.3)).unwrap();
        assert!((s.purity() - 0.58).abs() < 1e-14);
    }

    #[test]
    fn counterexample_bc_branches_are_orthogonal() {
        // |00⟩ and |+1⟩ on BC
        let s = 0.5f64.sqrt();
        let b0 = [1.0, 0.0, 0.0, 0.0];
        let b1 = [0.0, s, 0.0, s];
        let overlap: f64 = b0.iter().zip(&b1).map(|(a, b)| a * b).sum();
        assert_eq!(overlap, 0.0);
        // and the state's A-conditional BC blocks reproduce them
        let st = named_state::<f64>("counterexample", &p(0.4)).unwrap();
        let rho_bc = partial_trace(st.rho(), &[2, 2, 2], &[1, 2]).unwrap();
        assert!((purity(&rho_bc) - (0.16 + 0.36)).abs() < 1e-14);
    }

    #[test]
    fn parameter_errors() {
        assert!(named_state::<f64>("nope", &BTreeMap::new()).is_err());
        assert!(named_state::<f64>("ghz_plus", &BTreeMap::new()).is_err());
        assert!(named_state::<f64>("ghz_plus", &p(1.5)).is_err());
        assert!(named_state::<f64>("ghz", &p(0.5)).is_err());
        let bad = BTreeMap::from([
            ("alpha2".to_string(), 0.5),
            ("beta2".to_string(), 0.5),
            ("gamma2".to_string(), 0.5),
        ]);
        assert!(matches!(named_state::<f64>("w_general", &bad), Err(QcorrError::Param(_))));
    }

    #[test]
    fn w_general_single_parameter() {
        let s = named_state::<f64>("w_general", &p(1.0 / 3.0)).unwrap();
        let w = named_state::<f64>("w", &BTreeMap::new()).unwrap();
        assert!(s.max_abs_diff(&w) < 1e-15);
    }

    #[test]
    fn every_family_is_a_valid_state() {
        for fam in Family::ALL {
            let params = if fam.is_single_parameter() { p(0.37) } else { BTreeMap::new() };
            let s = named_state::<f64>(fam.name(), &params).unwrap();
            assert_eq!(s.origin().unwrap().family, fam);
            assert_eq!(s.dims(), &[2, 2, 2]);
        }
    }
}
