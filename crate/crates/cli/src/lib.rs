//! Subcommand implementations for the `mbqc` binary. Every command takes
//! JSON text and returns JSON; qubit labels are 1-based throughout.

use std::collections::BTreeSet;
use std::fmt;

use mbqc_core::formats::{to_labels, FormatError, LoadedState, RelationFile, StateFile};
use mbqc_core::oracle::{self, MbqcProgram, OracleError, OutcomeDistribution};
use mbqc_core::processing::{self, enumerate_pairs, normal_form, ProcessingError};
use mbqc_core::temporal::{closure, io_sets, TemporalRelation};
use mbqc_core::transforms::{self, FlipReport, FrameChange, TransformError};
use mbqc_core::wave::{self, WaveError};
use mbqc_core::{BitMat, Bits, ExtremalPair, OrderKind, ProcessingRelations, StabilizerError, Tableau};
use serde_json::{json, Value};

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_INVALID_PAIR: i32 = 2;
pub const EXIT_INVALID_STABILIZER: i32 = 3;
pub const EXIT_NON_COMMUTING: i32 = 4;
pub const EXIT_SIZE_CAP: i32 = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(EXIT_PARSE, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Parse(m) => CliError::parse(m),
            FormatError::Stabilizer(s) => s.into(),
        }
    }
}

impl From<StabilizerError> for CliError {
    fn from(e: StabilizerError) -> Self {
        CliError::new(EXIT_INVALID_STABILIZER, e.to_string())
    }
}

impl From<ProcessingError> for CliError {
    fn from(e: ProcessingError) -> Self {
        match e {
            ProcessingError::Stabilizer(s) => s.into(),
            ProcessingError::RankMismatch { .. }
            | ProcessingError::NotOptimalOutput
            | ProcessingError::GaugeNotNormalizable => CliError::new(EXIT_NON_COMMUTING, e.to_string()),
            ProcessingError::Shape(_) => CliError::parse(e.to_string()),
            _ => CliError::new(EXIT_INVALID_PAIR, e.to_string()),
        }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::Processing(p) => p.into(),
            _ => CliError::new(EXIT_INVALID_PAIR, e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        let code = match e {
            OracleError::TooLarge { .. } => EXIT_SIZE_CAP,
            OracleError::PhaseInconsistent => EXIT_INVALID_STABILIZER,
            OracleError::GaugeLength { .. } => EXIT_PARSE,
            _ => EXIT_INVALID_PAIR,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<WaveError> for CliError {
    fn from(e: WaveError) -> Self {
        let code = match e {
            WaveError::UnsupportedFrame(_) => EXIT_INVALID_STABILIZER,
            _ => EXIT_PARSE,
        };
        CliError::new(code, e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A pair given on the command line with 1-based labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairArg {
    pub i_gauge: Vec<usize>,
    pub o_comp: Vec<usize>,
}

impl PairArg {
    fn resolve(&self, n: usize) -> CliResult<ExtremalPair> {
        let conv = |v: &[usize]| -> CliResult<Vec<usize>> {
            v.iter()
                .map(|&l| {
                    if l == 0 || l > n {
                        Err(CliError::new(EXIT_INVALID_PAIR, format!("label {l} outside 1..={n}")))
                    } else {
                        Ok(l - 1)
                    }
                })
                .collect()
        };
        Ok(ExtremalPair::new(conv(&self.i_gauge)?, conv(&self.o_comp)?))
    }
}

/// Parses `"1,3"` into labels; the empty string is the empty set.
pub fn parse_labels(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::parse(format!("bad label {s:?}"))))
        .collect()
}

/// Parses a bit string such as `"010"`.
pub fn parse_bits(text: &str) -> CliResult<Bits> {
    let bools = text
        .trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(CliError::parse(format!("bad bit {c:?} in {text:?}"))),
        })
        .collect::<CliResult<Vec<bool>>>()?;
    Ok(Bits::from_bools(&bools))
}

fn load_state(text: &str) -> CliResult<LoadedState> {
    Ok(StateFile::from_json(text)?.load()?)
}

fn parse_relations(text: &str) -> CliResult<ProcessingRelations> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::parse(e.to_string()))?;
    // An analyze report carries its relations under "relations".
    let inner = match value.get("relations") {
        Some(r) => r.clone(),
        None => value,
    };
    let file: RelationFile = serde_json::from_value(inner).map_err(|e| CliError::parse(e.to_string()))?;
    let rel = file.to_relations()?;
    rel.check_shapes()?;
    Ok(rel)
}

fn pick_pair(t: &Tableau, pair: Option<&PairArg>) -> CliResult<ProcessingRelations> {
    match pair {
        Some(p) => Ok(processing::relations_for_pair(t, &p.resolve(t.n())?)?),
        None => enumerate_pairs(t, Some(1))
            .next()
            .map(|(_, rel)| rel)
            .ok_or_else(|| CliError::new(EXIT_INVALID_PAIR, "no extremal pair")),
    }
}

fn matrix(m: &BitMat) -> Value {
    json!(m.to_u8_rows())
}

fn bits(b: &Bits) -> Value {
    json!((0..b.len()).map(|i| b.get(i) as u8).collect::<Vec<u8>>())
}

fn pair_json(p: &ExtremalPair) -> Value {
    json!({ "i_gauge": to_labels(&p.i_gauge), "o_comp": to_labels(&p.o_comp) })
}

fn order_json(rel: &TemporalRelation) -> Value {
    match &rel.kind {
        OrderKind::PartialOrder { rounds } => json!({
            "kind": "partial_order",
            "rounds": rounds.iter().map(|r| to_labels(r)).collect::<Vec<_>>(),
        }),
        OrderKind::Ctc { witness } => json!({ "kind": "ctc", "witness": to_labels(witness) }),
    }
}

fn relations_json(rel: &ProcessingRelations) -> Value {
    serde_json::to_value(RelationFile::from_relations(rel)).expect("relation file serializes")
}

fn temporal_json(rel: &ProcessingRelations) -> Value {
    let tr = closure(&rel.t);
    let (inputs, outputs) = io_sets(&rel.t);
    json!({
        "inputs": to_labels(&inputs),
        "outputs": to_labels(&outputs),
        "closure": matrix(&tr.closure),
        "order": order_json(&tr),
    })
}

/// Normal-form blocks, relations and temporal classification for one pair.
pub fn cmd_analyze(state: &str, pair: Option<&PairArg>) -> CliResult<Value> {
    let st = load_state(state)?;
    let rel = pick_pair(&st.tableau, pair)?;
    let nf = normal_form(&st.tableau, &rel.pair)?;
    let mut report = temporal_json(&rel);
    let obj = report.as_object_mut().expect("object");
    obj.insert("n".into(), json!(st.tableau.n()));
    obj.insert("pair".into(), pair_json(&rel.pair));
    obj.insert(
        "normal_form".into(),
        json!({
            "T": matrix(&nf.tt_t),
            "H": matrix(&nf.tt_h),
            "Z": matrix(&nf.tt_z),
            "R": matrix(&nf.tt_r),
            "overlap_flags": to_labels(&nf.overlap_flags),
        }),
    );
    obj.insert("relations".into(), relations_json(&rel));
    Ok(report)
}

/// One JSON value per pair, or per distinct closure with `orders_only`.
pub fn cmd_enumerate(state: &str, limit: Option<usize>, orders_only: bool) -> CliResult<Vec<Value>> {
    let st = load_state(state)?;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (pair, rel) in enumerate_pairs(&st.tableau, None) {
        if limit.is_some_and(|l| out.len() >= l) {
            break;
        }
        if orders_only {
            let tr = closure(&rel.t);
            if !seen.insert(tr.closure.to_u8_rows()) {
                continue;
            }
            out.push(json!({
                "closure": matrix(&tr.closure),
                "order": order_json(&tr),
                "pair": pair_json(&pair),
            }));
        } else {
            let mut rec = temporal_json(&rel);
            let obj = rec.as_object_mut().expect("object");
            obj.insert("pair".into(), pair_json(&pair));
            obj.insert("relations".into(), relations_json(&rel));
            out.push(rec);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipMode {
    Plane,
    LocalComp,
    Ctc,
}

/// Either a state (optionally with a pair) or bare relations.
#[derive(Debug, Clone, Copy)]
pub enum FlipInput<'a> {
    State { text: &'a str, pair: Option<&'a PairArg> },
    Relations(&'a str),
}

fn frame_changes_json(changes: &[(usize, FrameChange)]) -> Value {
    json!(changes
        .iter()
        .map(|(q, c)| json!({ "qubit": q + 1, "change": serde_json::to_value(c).expect("serializes") }))
        .collect::<Vec<_>>())
}

fn flip_report_json(rep: &FlipReport, before: &ProcessingRelations, angles: Option<&[f64]>) -> Value {
    let mut v = json!({
        "site": rep.site + 1,
        "case": serde_json::to_value(rep.case).expect("serializes"),
        "relations": relations_json(&rep.relations),
        "frame_changes": frame_changes_json(&rep.frame_changes),
        "same_relation": transforms::same_relation(&before.t, &rep.relations.t),
    });
    let obj = v.as_object_mut().expect("object");
    if let Some(f) = &rep.flag_bit {
        obj.insert("flag_bit".into(), json!({ "qubit": f.qubit + 1, "z": bits(&f.z), "r": bits(&f.r) }));
    }
    if let Some(h) = rep.horizon {
        obj.insert("horizon".into(), json!(h + 1));
    }
    if let Some(t) = &rep.tableau {
        let new_angles = angles.map(|a| {
            let mut a = a.to_vec();
            a[rep.site] = transforms::flipped_angle(a[rep.site]);
            a
        });
        obj.insert(
            "state".into(),
            serde_json::to_value(StateFile::from_tableau(t, new_angles)).expect("serializes"),
        );
    }
    v
}

pub fn cmd_flip(input: FlipInput<'_>, qubit: usize, mode: FlipMode) -> CliResult<Value> {
    let (tableau, angles, rel) = match input {
        FlipInput::State { text, pair } => {
            let st = load_state(text)?;
            let rel = pick_pair(&st.tableau, pair)?;
            (Some(st.tableau), st.angles, rel)
        }
        FlipInput::Relations(text) => (None, None, parse_relations(text)?),
    };
    let n = rel.n();
    if qubit == 0 || qubit > n {
        return Err(CliError::new(EXIT_INVALID_PAIR, format!("qubit {qubit} outside 1..={n}")));
    }
    let a = qubit - 1;
    match mode {
        FlipMode::Plane => {
            let mut rep = transforms::flip_plane(&rel, a)?;
            rep.tableau = tableau.map(|t| t.flip_frame(a));
            Ok(flip_report_json(&rep, &rel, angles.as_deref()))
        }
        FlipMode::LocalComp => {
            let m = transforms::modified_flip(&rel.t, a)?;
            Ok(json!({
                "site": qubit,
                "T": matrix(&m.t),
                "plane_changes": to_labels(&m.plane_changes),
                "same_relation": transforms::same_relation(&rel.t, &m.t),
            }))
        }
        FlipMode::Ctc => {
            let t = tableau.ok_or_else(|| CliError::parse("CTC removal needs a state, not bare relations"))?;
            let rep = transforms::remove_ctc1(&t, &rel, a)?;
            Ok(flip_report_json(&rep, &rel, angles.as_deref()))
        }
    }
}

/// Relations (or an analyze report) back to a raw-tableau state file.
pub fn cmd_reconstruct(relations: &str) -> CliResult<Value> {
    let rel = parse_relations(relations)?;
    let t = processing::reconstruct_tableau(&rel).map_err(|e| match e {
        ProcessingError::Stabilizer(StabilizerError::NonCommuting(a, b)) => CliError::new(
            EXIT_NON_COMMUTING,
            format!("reconstructed generators {} and {} do not commute", a + 1, b + 1),
        ),
        other => other.into(),
    })?;
    Ok(serde_json::to_value(StateFile::from_tableau(&t, None)).expect("serializes"))
}

pub fn cmd_wave(state: &str, pair: Option<&PairArg>) -> CliResult<Value> {
    let st = load_state(state)?;
    let g = st
        .graph
        .as_ref()
        .ok_or_else(|| CliError::parse("wave needs a graph state given by edges"))?;
    let lap = wave::laplacian_with_frames(g, st.tableau.frames())?;
    let rel = pick_pair(&st.tableau, pair)?;
    let cones = wave::cones_from_influence(&rel.t, &rel.pair.o_comp);
    let residuals = match wave::check_wave(g, &lap.b, &rel.pair.o_comp, &cones) {
        Ok(()) => Vec::new(),
        Err(WaveError::Residual(r)) => r,
        Err(e) => return Err(e.into()),
    };
    Ok(json!({
        "pair": pair_json(&rel.pair),
        "laplacian": matrix(&lap.delta),
        "plane_bits": bits(&lap.b),
        "mass": bits(&lap.mass()),
        "cones": cones.iter().map(|(a, f)| json!({ "qubit": a + 1, "cone": to_labels(&f.ones().collect::<Vec<_>>()) })).collect::<Vec<_>>(),
        "residuals": residuals.iter().map(|(a, v)| [a + 1, v + 1]).collect::<Vec<_>>(),
        "ok": residuals.is_empty(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Determinism,
    Gauge,
    Randomness,
}

#[derive(Debug, Clone, Default)]
pub struct SimulateOptions<'a> {
    pub relations: Option<&'a str>,
    pub pair: Option<&'a PairArg>,
    pub gauge: Option<&'a str>,
    pub post_select: bool,
    pub check: Option<Check>,
    pub z_bits: Option<&'a str>,
    pub r_bits: Option<&'a str>,
}

fn distribution_json(d: &OutcomeDistribution) -> Value {
    json!(d.probs)
}

pub fn cmd_simulate(state: &str, opts: &SimulateOptions<'_>) -> CliResult<Value> {
    let st = load_state(state)?;
    let n = st.tableau.n();
    let cap = oracle::max_qubits();
    if n > cap {
        return Err(OracleError::TooLarge { n, cap }.into());
    }
    let angles = st
        .angles
        .clone()
        .ok_or_else(|| CliError::parse("simulate needs angles in the state file"))?;
    let rel = match opts.relations {
        Some(text) => parse_relations(text)?,
        None => pick_pair(&st.tableau, opts.pair)?,
    };
    let prog = MbqcProgram::new(st.tableau, angles, rel)?;
    let k = prog.gauge_len();
    let g = match opts.gauge {
        Some(text) => parse_bits(text)?,
        None => Bits::zeros(k),
    };
    let mut report = json!({
        "pair": pair_json(&prog.relations.pair),
        "gauge": oracle::bit_key(&g),
    });
    let obj = report.as_object_mut().expect("object");
    if opts.post_select {
        let ps = oracle::run_postselected(&prog, &g)?;
        obj.insert("distribution".into(), distribution_json(&ps.distribution));
        obj.insert("success_prob".into(), json!(ps.success_prob));
    } else {
        obj.insert("distribution".into(), distribution_json(&oracle::run_exact(&prog, &g)?));
    }
    match opts.check {
        None => {}
        Some(Check::Determinism) => {
            let rep = oracle::verify_determinism(&prog)?;
            obj.insert(
                "determinism".into(),
                json!({ "max_deviation": rep.max_deviation, "deterministic": rep.deterministic }),
            );
        }
        Some(Check::Gauge) => {
            let reference = oracle::run_exact(&prog, &Bits::zeros(k))?;
            let mut worst: f64 = 0.0;
            for g in oracle::all_gauges(k) {
                worst = worst.max(oracle::run_exact(&prog, &g)?.distance(&reference));
            }
            obj.insert(
                "gauge_check".into(),
                json!({ "max_distance": worst, "invariant": worst < oracle::DETERMINISM_TOLERANCE }),
            );
        }
        Some(Check::Randomness) => {
            let z = parse_bits(opts.z_bits.ok_or_else(|| CliError::parse("randomness check needs --z-bits"))?)?;
            let r = match opts.r_bits {
                Some(text) => parse_bits(text)?,
                None => Bits::zeros(k),
            };
            let p0 = oracle::randomness_check(&prog, &z, &r)?;
            obj.insert("randomness".into(), json!({ "p0": p0 }));
        }
    }
    Ok(report)
}

/// Indented JSON with scalar arrays kept on one line, plus a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v, 0);
    s.push('\n');
    s
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            out.push_str(&v.to_string());
        }
        Value::Array(items) if items.iter().all(|x| x.as_array().is_some_and(|r| r.iter().all(|y| y.is_number()))) => {
            // Matrices: one row per line.
            out.push('[');
            for (i, row) in items.iter().enumerate() {
                out.push_str(if i == 0 { "" } else { ", " });
                out.push_str(&row.to_string());
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        _ => out.push_str(&v.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_and_bit_parsing() {
        assert_eq!(parse_labels("1, 3").unwrap(), vec![1, 3]);
        assert!(parse_labels("").unwrap().is_empty());
        assert_eq!(parse_labels("x").unwrap_err().code, EXIT_PARSE);
        assert_eq!(parse_bits("010").unwrap(), Bits::from_u8(&[0, 1, 0]));
        assert!(parse_bits("012").is_err());
    }

    #[test]
    fn render_is_valid_json() {
        let v = json!({ "T": [[0, 1], [1, 0]], "rounds": [[1], [2, 3]], "e": [], "o": {}, "x": [{ "a": 1 }] });
        let text = render(&v);
        assert!(text.contains("\"T\": [[0,1], [1,0]]"));
        assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), v);
    }

    #[test]
    fn out_of_range_pair() {
        let p = PairArg {
            i_gauge: vec![4],
            o_comp: vec![1],
        };
        assert_eq!(p.resolve(3).unwrap_err().code, EXIT_INVALID_PAIR);
    }
}
