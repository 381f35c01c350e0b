//! JSON file schemas for states and evolution paths, and a JSON writer
//! that emits every float at 17 significant digits (lossless f64
//! round-trip).
//!
//! State files:
//! ```json
//! {"d": 2, "re": [[1.0, 0.0], [0.0, 1.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}
//! ```
//!
//! Path files carry `d`, `side` ("first" | "second"), `duration`, a `kind`
//! and its fields:
//! - `cartan_loop`: `weight_index` (1-based), optional `antifundamental`,
//!   optional `profile` ("linear" | "smooth" | "smoother");
//! - `coset_loop`: `root` = [i, k] (1-based, i < k), `theta`, optional
//!   `profile`;
//! - `composite`: `segments`, each a nested kind with a relative `duration`;
//! - `samples`: uniform `samples` of {re, im} matrices over [0, duration];
//! - `pair` (two-sided): `first` and `second` nested kinds sharing the top
//!   duration.

use serde::{Deserialize, Serialize};

use crate::algebra::{build_algebra, AlgebraData};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionPath, Profile, Side};
use crate::linalg::CMat;
use crate::states::TwoQuditState;
use num_complex::Complex64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixData {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixData {
    pub fn from_matrix(m: &CMat) -> Self {
        let d = m.nrows();
        Self {
            re: (0..d)
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
                .collect(),
            im: (0..d)
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self, d: usize) -> Result<CMat> {
        let check = |rows: &Vec<Vec<f64>>, name: &str| -> Result<()> {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::InvalidInput(format!(
                    "field `{name}` must be a {d}x{d} row-major array"
                )));
            }
            Ok(())
        };
        check(&self.re, "re")?;
        check(&self.im, "im")?;
        Ok(CMat::from_fn(d, d, |i, j| {
            Complex64::new(self.re[i][j], self.im[i][j])
        }))
    }
}

/// State file: `{"d": n, "re": [[..]], "im": [[..]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub d: usize,
    #[serde(flatten)]
    pub matrix: MatrixData,
}

impl StateFile {
    pub fn from_state(state: &TwoQuditState) -> Self {
        Self {
            d: state.d(),
            matrix: MatrixData::from_matrix(state.coeffs()),
        }
    }

    pub fn to_state(&self) -> Result<TwoQuditState> {
        TwoQuditState::new(self.matrix.to_matrix(self.d)?)
    }
}

pub fn state_from_json(text: &str) -> Result<TwoQuditState> {
    let file: StateFile = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("state file: {e}")))?;
    file.to_state()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideSpec {
    #[default]
    First,
    Second,
}

impl From<SideSpec> for Side {
    fn from(s: SideSpec) -> Side {
        match s {
            SideSpec::First => Side::First,
            SideSpec::Second => Side::Second,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSpec {
    Linear,
    Smooth,
    #[default]
    Smoother,
}

impl From<ProfileSpec> for Profile {
    fn from(p: ProfileSpec) -> Profile {
        match p {
            ProfileSpec::Linear => Profile::Linear,
            ProfileSpec::Smooth => Profile::Smooth,
            ProfileSpec::Smoother => Profile::Smoother,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathKindSpec {
    CartanLoop {
        /// 1-based fundamental weight index.
        weight_index: usize,
        #[serde(default)]
        antifundamental: bool,
        #[serde(default)]
        profile: ProfileSpec,
    },
    CosetLoop {
        /// 1-based pair [i, k], i < k.
        root: [usize; 2],
        theta: f64,
        #[serde(default)]
        profile: ProfileSpec,
    },
    Composite {
        segments: Vec<SegmentSpec>,
    },
    Samples {
        samples: Vec<MatrixData>,
    },
    Pair {
        first: Box<SegmentSpec>,
        second: Box<SegmentSpec>,
    },
}

fn default_duration() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentSpec {
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(flatten)]
    pub kind: PathKindSpec,
}

/// Path file: top-level `d`, `side`, `duration` plus a kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathFile {
    pub d: usize,
    #[serde(default)]
    pub side: SideSpec,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(flatten)]
    pub kind: PathKindSpec,
}

pub fn path_from_json(text: &str) -> Result<EvolutionPath> {
    let file: PathFile = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("path file: {e}")))?;
    build_path(&file)
}

pub fn build_path(file: &PathFile) -> Result<EvolutionPath> {
    let algebra = build_algebra(file.d)?;
    if file.duration <= 0.0 {
        return Err(Error::InvalidInput("duration must be positive".into()));
    }
    match &file.kind {
        PathKindSpec::Pair { first, second } => {
            let p1 = build_node(&algebra, first, file.duration, Side::First)?;
            let p2 = build_node(&algebra, second, file.duration, Side::Second)?;
            EvolutionPath::combine(p1, p2)
        }
        kind => {
            let seg = SegmentSpec {
                duration: file.duration,
                kind: kind.clone(),
            };
            build_node(&algebra, &seg, file.duration, file.side.into())
        }
    }
}

fn build_node(
    algebra: &AlgebraData,
    seg: &SegmentSpec,
    duration: f64,
    side: Side,
) -> Result<EvolutionPath> {
    match &seg.kind {
        PathKindSpec::CartanLoop {
            weight_index,
            antifundamental,
            profile,
        } => {
            let mut beta = algebra.magnetic_weight(*weight_index)?;
            if *antifundamental {
                beta = -beta;
            }
            EvolutionPath::cartan_loop(algebra, &beta, duration, (*profile).into(), side)
        }
        PathKindSpec::CosetLoop {
            root,
            theta,
            profile,
        } => {
            let [i, k] = *root;
            if i == 0 || k == 0 || i >= k || k > algebra.d() {
                return Err(Error::InvalidInput(format!(
                    "root pair must satisfy 1 <= i < k <= d, got [{i}, {k}]"
                )));
            }
            let index = algebra.root_index(i - 1, k - 1)?;
            EvolutionPath::coset_loop_with_profile(
                algebra,
                index,
                *theta,
                duration,
                (*profile).into(),
                side,
            )
        }
        PathKindSpec::Composite { segments } => {
            if segments.is_empty() {
                return Err(Error::InvalidInput("composite path has no segments".into()));
            }
            let total_rel: f64 = segments.iter().map(|s| s.duration).sum();
            if total_rel <= 0.0 {
                return Err(Error::InvalidInput(
                    "composite segment durations must be positive".into(),
                ));
            }
            let mut acc: Option<EvolutionPath> = None;
            for s in segments {
                let part = build_node(algebra, s, duration * s.duration / total_rel, side)?;
                acc = Some(match acc {
                    None => part,
                    Some(prev) => prev.concat(part)?,
                });
            }
            Ok(acc.unwrap())
        }
        PathKindSpec::Samples { samples } => {
            let table: Result<Vec<CMat>> = samples
                .iter()
                .map(|m| m.to_matrix(algebra.d()))
                .collect();
            EvolutionPath::from_samples(algebra.d(), duration, table?, side)
        }
        PathKindSpec::Pair { .. } => Err(Error::InvalidInput(
            "`pair` is only valid at the top level of a path file".into(),
        )),
    }
}

/// Serialize to pretty JSON with every float at 17 significant digits.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter::new());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidInput(format!("serialization: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::InvalidInput(format!("utf8: {e}")))
}

/// Pretty formatter writing floats as `{:.16e}` (17 significant digits).
struct SciFormatter {
    indent: usize,
    has_value: bool,
}

impl SciFormatter {
    fn new() -> Self {
        Self {
            indent: 0,
            has_value: false,
        }
    }

    fn newline<W: ?Sized + std::io::Write>(&self, writer: &mut W) -> std::io::Result<()> {
        writer.write_all(b"\n")?;
        for _ in 0..self.indent {
            writer.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{value:.8e}")
    }

    fn begin_array<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        writer.write_all(b"[")
    }

    fn end_array<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(writer)?;
        }
        writer.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, _writer: &mut W) -> std::io::Result<()> {
        self.has_value = true;
        Ok(())
    }

    fn begin_object<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        writer.write_all(b"{")
    }

    fn end_object<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(writer)?;
        }
        writer.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        writer.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, _writer: &mut W) -> std::io::Result<()> {
        self.has_value = true;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_dist;
    use crate::sample;

    #[test]
    fn state_round_trip() {
        let mut rng = sample::rng_from_seed(71);
        let state = sample::random_state(3, &mut rng);
        let text = to_json_string(&StateFile::from_state(&state)).unwrap();
        // the serialized payload survives bit-exactly
        let file: StateFile = serde_json::from_str(&text).unwrap();
        assert_eq!(file.matrix.re, StateFile::from_state(&state).matrix.re);
        assert_eq!(file.matrix.im, StateFile::from_state(&state).matrix.im);
        // loading re-normalizes (by a factor bit-close to 1)
        let back = file.to_state().unwrap();
        assert!(frobenius_dist(back.coeffs(), state.coeffs()) < 1e-15);
    }

    #[test]
    fn seventeen_digit_floats_round_trip() {
        let values = [1.0 / 3.0, std::f64::consts::PI, 2.2214414690791831e+00, 1e-300];
        for v in values {
            let text = to_json_string(&vec![v]).unwrap();
            let parsed: Vec<f64> = serde_json::from_str(&text).unwrap();
            assert_eq!(parsed[0].to_bits(), v.to_bits(), "{text}");
        }
    }

    #[test]
    fn deterministic_serialization() {
        let mut rng = sample::rng_from_seed(72);
        let state = sample::random_state(2, &mut rng);
        let a = to_json_string(&StateFile::from_state(&state)).unwrap();
        let b = to_json_string(&StateFile::from_state(&state)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parse_cartan_loop_spec() {
        let text = r#"{"d": 3, "side": "first", "kind": "cartan_loop", "weight_index": 1}"#;
        let path = path_from_json(text).unwrap();
        assert_eq!(path.d(), 3);
        assert_eq!(path.closure_class(), Some(2)); // z = −1 mod 3
    }

    #[test]
    fn parse_antifundamental_and_profile() {
        let text = r#"{"d": 2, "kind": "cartan_loop", "weight_index": 1,
                       "antifundamental": true, "profile": "linear", "duration": 2.0}"#;
        let path = path_from_json(text).unwrap();
        assert_eq!(path.closure_class(), Some(1));
        assert!((path.duration() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn parse_coset_loop_spec() {
        let text = r#"{"d": 3, "kind": "coset_loop", "root": [1, 3], "theta": 0.7}"#;
        let path = path_from_json(text).unwrap();
        assert!((path.solid_angle().unwrap()
            - std::f64::consts::TAU * (1.0 - 0.7f64.cos()))
        .abs()
            < 1e-12);

        let bad = r#"{"d": 3, "kind": "coset_loop", "root": [3, 1], "theta": 0.7}"#;
        assert!(path_from_json(bad).is_err());
    }

    #[test]
    fn parse_composite_spec() {
        let text = r#"{"d": 2, "kind": "composite", "segments": [
            {"kind": "cartan_loop", "weight_index": 1},
            {"kind": "cartan_loop", "weight_index": 1, "duration": 1.0}
        ]}"#;
        let path = path_from_json(text).unwrap();
        // two d=2 fundamental loops: z = 1 + 1 ≡ 0 (mod 2)
        assert_eq!(path.closure_class(), Some(0));
        assert!(path.closure_residual().unwrap() < 1e-7);
    }

    #[test]
    fn parse_pair_spec() {
        let text = r#"{"d": 2, "kind": "pair",
            "first": {"kind": "cartan_loop", "weight_index": 1},
            "second": {"kind": "coset_loop", "root": [1, 2], "theta": 0.5}}"#;
        let path = path_from_json(text).unwrap();
        assert_eq!(path.side(), crate::evolution::PathSide::Both);
    }

    #[test]
    fn parse_samples_spec_round_trip() {
        let alg = crate::algebra::build_algebra(2).unwrap();
        let beta = alg.magnetic_weight(1).unwrap();
        let src = EvolutionPath::cartan_loop(&alg, &beta, 1.0, Profile::Smooth, Side::First)
            .unwrap();
        let samples: Vec<MatrixData> = (0..=64)
            .map(|m| {
                MatrixData::from_matrix(&src.sample(Side::First, m as f64 / 64.0).unwrap())
            })
            .collect();
        let file = PathFile {
            d: 2,
            side: SideSpec::First,
            duration: 1.0,
            kind: PathKindSpec::Samples { samples },
        };
        let text = to_json_string(&file).unwrap();
        let path = path_from_json(&text).unwrap();
        for &t in &[0.0, 0.5, 1.0] {
            let a = src.sample(Side::First, t).unwrap();
            let b = path.sample(Side::First, t).unwrap();
            assert!(frobenius_dist(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn malformed_input_reports_location() {
        let err = path_from_json(r#"{"d": 3, "kind": "cartan_loop""#).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("line"), "diagnostic carries location: {msg}");

        let err = state_from_json(r#"{"d": 2, "re": [[1.0]], "im": [[0.0]]}"#).unwrap_err();
        assert!(format!("{err}").contains("2x2"));
    }
}
