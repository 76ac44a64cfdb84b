//! Update strategies: which `(i, j, k)` to try, in what order, and when to
//! stop trying.
//!
//! Methods are named the way the experiments name them, e.g.
//! `STMF_ByRow_RandPermR_TD_A_W`: update family, data permutation,
//! candidate selection, and a trailing `_W` when the input is transposed to
//! a wide shape first. `FastSTMF` is an alias for that ByRow variant and
//! `STMF` is the original baseline.

mod byelement;
mod bymatrix;
mod byrow;
mod select;

pub use byelement::{byelement_sweep, ElementSweepStats};
pub use bymatrix::{bymatrix_candidates, bymatrix_step};
pub use byrow::{byrow_candidate_order, byrow_seq, byrow_sweep};
pub use select::{select_k_td, select_k_td_a, select_k_td_b};

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{run_fit, FitConfig, FitMethod, FitOutcome, FitState, Orientation, StmfBaseline, SweepCtx};
use crate::error::{Error, Result};
use crate::masked::{sort_perm_by_min, Axis, MaskedMatrix, Permutation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    ByRow,
    ByElement,
    ByMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Selection {
    Seq,
    Td,
    TdA,
    TdB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PermutationMode {
    NoPerm,
    /// Rows sorted ascending by minimum.
    PermR,
    /// Columns sorted ascending by minimum.
    PermC,
    /// One uniformly random row permutation.
    RandPermR,
}

/// A proposed update strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StrategySpec {
    pub family: Family,
    pub selection: Selection,
    pub permutation: PermutationMode,
    /// Transpose tall inputs (`m > n`) before fitting.
    pub prefer_wide: bool,
}

impl StrategySpec {
    pub fn new(family: Family, selection: Selection, permutation: PermutationMode, prefer_wide: bool) -> Result<Self> {
        let spec = Self {
            family,
            selection,
            permutation,
            prefer_wide,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `STMF_ByRow_RandPermR_TD_A_W`.
    pub const fn fast_stmf() -> Self {
        Self {
            family: Family::ByRow,
            selection: Selection::TdA,
            permutation: PermutationMode::RandPermR,
            prefer_wide: true,
        }
    }

    /// `STMF_ByElement_PermC_TD_W`.
    pub const fn by_element() -> Self {
        Self {
            family: Family::ByElement,
            selection: Selection::Td,
            permutation: PermutationMode::PermC,
            prefer_wide: true,
        }
    }

    /// `STMF_ByMatrix_NoPerm_TD_W`.
    pub const fn by_matrix() -> Self {
        Self {
            family: Family::ByMatrix,
            selection: Selection::Td,
            permutation: PermutationMode::NoPerm,
            prefer_wide: true,
        }
    }

    pub const fn by_row(selection: Selection, permutation: PermutationMode, prefer_wide: bool) -> Self {
        Self {
            family: Family::ByRow,
            selection,
            permutation,
            prefer_wide,
        }
    }

    pub fn validate(&self) -> Result<()> {
        use PermutationMode::*;
        let ok = match self.family {
            Family::ByElement => self.selection == Selection::Td && self.permutation == PermC,
            Family::ByMatrix => self.selection == Selection::Td && self.permutation == NoPerm,
            Family::ByRow => matches!(self.permutation, NoPerm | PermR | RandPermR),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("unsupported strategy combination {self}")))
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match self.family {
            Family::ByRow => "ByRow",
            Family::ByElement => "ByElement",
            Family::ByMatrix => "ByMatrix",
        };
        let perm = match self.permutation {
            PermutationMode::NoPerm => "NoPerm",
            PermutationMode::PermR => "PermR",
            PermutationMode::PermC => "PermC",
            PermutationMode::RandPermR => "RandPermR",
        };
        let sel = match self.selection {
            Selection::Seq => "SEQ",
            Selection::Td => "TD",
            Selection::TdA => "TD_A",
            Selection::TdB => "TD_B",
        };
        write!(f, "STMF_{family}_{perm}_{sel}")?;
        if self.prefer_wide {
            write!(f, "_W")?;
        }
        Ok(())
    }
}

impl FromStr for StrategySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "faststmf" {
            return Ok(Self::fast_stmf());
        }
        let unknown = || Error::UnknownMethod(s.to_string());
        let mut tokens: Vec<&str> = lower.split('_').collect();
        if tokens.first() != Some(&"stmf") {
            return Err(unknown());
        }
        tokens.remove(0);
        let prefer_wide = tokens.last() == Some(&"w");
        if prefer_wide {
            tokens.pop();
        }
        let [family, perm, sel @ ..] = tokens.as_slice() else {
            return Err(unknown());
        };
        let family = match *family {
            "byrow" => Family::ByRow,
            "byelement" => Family::ByElement,
            "bymatrix" => Family::ByMatrix,
            _ => return Err(unknown()),
        };
        let permutation = match *perm {
            "noperm" => PermutationMode::NoPerm,
            "permr" => PermutationMode::PermR,
            "permc" => PermutationMode::PermC,
            "randpermr" | "randperm" => PermutationMode::RandPermR,
            _ => return Err(unknown()),
        };
        let selection = match sel {
            ["seq"] => Selection::Seq,
            ["td"] => Selection::Td,
            ["td", "a"] => Selection::TdA,
            ["td", "b"] => Selection::TdB,
            _ => return Err(unknown()),
        };
        Self::new(family, selection, permutation, prefer_wide)
    }
}

impl Serialize for StrategySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StrategySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl FitMethod for StrategySpec {
    fn name(&self) -> String {
        self.to_string()
    }

    fn orientation(&self, r: &MaskedMatrix, rng: &mut ChaCha8Rng) -> Result<Orientation> {
        // square inputs count as wide
        let transposed = self.prefer_wide && r.rows() > r.cols();
        let work;
        let fitted = if transposed {
            work = r.transpose();
            &work
        } else {
            r
        };
        let (row_perm, col_perm) = match self.permutation {
            PermutationMode::NoPerm => (None, None),
            PermutationMode::PermR => (Some(sort_perm_by_min(fitted, Axis::Rows)), None),
            PermutationMode::PermC => (None, Some(sort_perm_by_min(fitted, Axis::Cols))),
            PermutationMode::RandPermR => (Some(Permutation::random(fitted.rows(), rng)), None),
        };
        Ok(Orientation {
            transposed,
            row_perm,
            col_perm,
        })
    }

    fn sweep(&self, state: &mut FitState<'_>, ctx: &mut SweepCtx<'_>) -> Result<()> {
        match self.family {
            Family::ByRow => byrow::sweep_rows(state, self.selection, ctx),
            Family::ByElement => byelement::sweep_elements(state, ctx).map(|_| ()),
            Family::ByMatrix => bymatrix::sweep_matrix(state, ctx),
        }
    }
}

/// Any runnable method: the STMF baseline or a proposed strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Stmf,
    Strategy(StrategySpec),
}

impl Method {
    pub fn is_baseline(&self) -> bool {
        matches!(self, Method::Stmf)
    }

    fn as_fit_method(&self) -> &dyn FitMethod {
        match self {
            Method::Stmf => &StmfBaseline,
            Method::Strategy(s) => s,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Stmf => write!(f, "STMF"),
            Method::Strategy(s) => s.fmt(f),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("stmf") {
            Ok(Method::Stmf)
        } else {
            s.parse().map(Method::Strategy)
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl FitMethod for Method {
    fn name(&self) -> String {
        self.to_string()
    }

    fn orientation(&self, r: &MaskedMatrix, rng: &mut ChaCha8Rng) -> Result<Orientation> {
        self.as_fit_method().orientation(r, rng)
    }

    fn sweep(&self, state: &mut FitState<'_>, ctx: &mut SweepCtx<'_>) -> Result<()> {
        self.as_fit_method().sweep(state, ctx)
    }
}

/// FastSTMF: wide orientation, one random row permutation, ByRow sweeps
/// with TD_A selection.
pub fn fast_stmf(r: &MaskedMatrix, rank: usize, config: &FitConfig) -> Result<FitOutcome> {
    run_fit(r, rank, &StrategySpec::fast_stmf(), config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_table_names() {
        assert_eq!(
            "STMF_ByRow_RandPermR_TD_A_W".parse::<StrategySpec>().unwrap(),
            StrategySpec::fast_stmf()
        );
        assert_eq!("faststmf".parse::<StrategySpec>().unwrap(), StrategySpec::fast_stmf());
        assert_eq!(
            "stmf_byrow_randperm_td_a_w".parse::<StrategySpec>().unwrap(),
            StrategySpec::fast_stmf()
        );
        assert_eq!(
            "STMF_ByElement_PermC_TD_W".parse::<StrategySpec>().unwrap(),
            StrategySpec::by_element()
        );
        assert_eq!(
            "STMF_ByMatrix_NoPerm_TD_W".parse::<StrategySpec>().unwrap(),
            StrategySpec::by_matrix()
        );
        let seq: StrategySpec = "STMF_ByRow_NoPerm_SEQ".parse().unwrap();
        assert_eq!(
            seq,
            StrategySpec::by_row(Selection::Seq, PermutationMode::NoPerm, false)
        );
        assert_eq!("STMF".parse::<Method>().unwrap(), Method::Stmf);
        assert_eq!(
            "FastSTMF".parse::<Method>().unwrap(),
            Method::Strategy(StrategySpec::fast_stmf())
        );
    }

    #[test]
    fn display_round_trips() {
        for name in [
            "STMF_ByRow_RandPermR_TD_A_W",
            "STMF_ByRow_PermR_TD_B",
            "STMF_ByRow_NoPerm_TD",
            "STMF_ByRow_NoPerm_SEQ_W",
            "STMF_ByElement_PermC_TD_W",
            "STMF_ByMatrix_NoPerm_TD",
        ] {
            let spec: StrategySpec = name.parse().unwrap();
            assert_eq!(spec.to_string(), name);
        }
    }

    #[test]
    fn rejects_invalid_combinations() {
        for name in [
            "STMF_ByElement_NoPerm_TD_W",
            "STMF_ByElement_PermC_TD_A",
            "STMF_ByMatrix_PermR_TD",
            "STMF_ByMatrix_NoPerm_SEQ",
            "STMF_ByRow_PermC_TD",
            "STMF_ByColumn_NoPerm_TD",
            "NMF",
            "STMF_ByRow_NoPerm_TD_C",
        ] {
            assert!(name.parse::<StrategySpec>().is_err(), "{name} accepted");
        }
    }

    #[test]
    fn serde_uses_names() {
        let m = Method::Strategy(StrategySpec::by_matrix());
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "\"STMF_ByMatrix_NoPerm_TD_W\"");
        assert_eq!(serde_json::from_str::<Method>(&s).unwrap(), m);
    }
}
