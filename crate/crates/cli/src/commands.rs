use serde::Serialize;
use serde_json::{json, Value};

use ifs_core::certify::certify_all_pairs;
use ifs_core::dimension::{
    box_dimension_estimate, closed_form_dimension, cover_sum, moran_dimension, subsystem_sequence, BoxEstimate,
    MoranProblem, RCoefficient,
};
use ifs_core::scan::{dmn_interval, scan_delta_mn, verify_displacement, verify_tech2, Classification, ScanResult};
use ifs_core::system::FULL_COVER_CAP;
use ifs_core::wsp::witness_search;
use ifs_core::{build_spqr, AffineMap1D, CertifyConfig, IFSParams, IFSystem, Mode, Scalar};

use crate::args::{CertifyArgs, DimensionArgs, Preset, RenderArgs, ScanArgs, Triple, WspArgs};
use crate::render::render_svg;
use crate::{CliError, Outcome};

const COEFFICIENT_NOTE: &str = "c = 4 counts the four maps of ratio r in the six-map system; \
c = 2 is the coefficient of the two-ratio closed form. Both are reported and neither \
is asserted to be the dimension of the attractor.";

const COVER_SUM_NOTE: &str = "at the similarity dimension the natural cover sum is 1 at every depth \
because widths factor over words; this diagnostic is inconclusive by design about the vanishing \
of the d-dimensional measure";

fn params(t: &Triple) -> Result<IFSParams, CliError> {
    let mode = if t.relaxed { Mode::Relaxed } else { Mode::Paper };
    IFSParams::new(t.p.clone(), t.q.clone(), t.r.clone(), mode).map_err(|e| CliError::Usage(e.to_string()))
}

fn triple_json(t: &Triple) -> Value {
    json!({
        "p": t.p,
        "q": t.q,
        "r": t.r,
        "mode": if t.relaxed { "relaxed" } else { "paper" },
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn csv_string<F>(header: &[&str], fill: F) -> Result<String, CliError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<(), csv::Error>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn certify(args: &CertifyArgs) -> Result<Outcome, CliError> {
    let params = params(&args.triple)?;
    if !args.eps.is_positive() {
        return Err(CliError::Usage("--eps must be positive".into()));
    }
    let cfg = CertifyConfig {
        eps: args.eps.clone(),
        step_cap: args.step_cap,
    };
    let cert = certify_all_pairs(&params, &cfg)?;
    let mut config = triple_json(&args.triple);
    config["eps"] = json!(args.eps);
    config["step_cap"] = json!(args.step_cap);
    Ok(Outcome::new("certify", config, to_value(&cert), cert.unique_one_point))
}

pub fn wsp(args: &WspArgs) -> Result<Outcome, CliError> {
    let params = params(&args.triple)?;
    let search = witness_search(&build_spqr(&params), args.target, args.max_m)?;
    let table = csv_string(&["m", "n", "ratio_defect", "offset_defect"], |w| {
        for pair in &search.pairs {
            w.write_record([
                pair.m.to_string(),
                pair.n.to_string(),
                format!("{:e}", pair.ratio_defect_f64),
                format!("{:e}", pair.offset_defect_f64),
            ])?;
        }
        Ok(())
    })?;
    let mut config = triple_json(&args.triple);
    config["target"] = json!(args.target);
    config["max_m"] = json!(args.max_m);
    let reached = search.reached;
    Ok(Outcome::new("wsp", config, to_value(&search), reached).with_file("wsp.csv", table))
}

fn cantor() -> IFSystem {
    let third = Scalar::new(1, 3);
    IFSystem::new(vec![
        AffineMap1D::new(third.clone(), Scalar::zero()),
        AffineMap1D::new(third, Scalar::new(2, 3)),
    ])
    .expect("contractions")
}

fn moran_entry(prob: &MoranProblem, tol: f64) -> Result<Value, CliError> {
    let d = moran_dimension(prob, tol)?;
    Ok(json!({ "ratios": prob.ratios(), "dimension": d, "residual": prob.eval(d) - 1.0 }))
}

fn box_table(est: &BoxEstimate) -> Result<String, CliError> {
    csv_string(&["depth", "scale", "N", "running_slope"], |w| {
        for row in &est.rows {
            w.write_record([
                row.depth.map_or(String::new(), |d| d.to_string()),
                format!("{:e}", row.scale),
                row.count.to_string(),
                row.running_slope.map_or(String::new(), |s| format!("{s}")),
            ])?;
        }
        Ok(())
    })
}

pub fn dimension(args: &DimensionArgs) -> Result<Outcome, CliError> {
    if args.depth < 3 || args.depth > FULL_COVER_CAP {
        return Err(CliError::Usage(format!("--depth must lie in 3..={FULL_COVER_CAP}")));
    }
    let sys = match args.preset {
        Preset::Cantor => cantor(),
        Preset::Spqr => build_spqr(&params(&args.triple)?),
    };
    let prob = MoranProblem::from_system(&sys)?;
    let similarity = moran_entry(&prob, args.tol)?;
    let d = similarity["dimension"].as_f64().expect("number");
    let covers = (1..=args.depth).map(|k| sys.cover(k)).collect::<Result<Vec<_>, _>>()?;
    let estimate = box_dimension_estimate(&covers)?;
    let sums = (1..=args.depth)
        .map(|k| Ok(json!({ "depth": k, "sum": cover_sum(&sys, d, k)? })))
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut result = json!({
        "similarity": similarity,
        "box_estimate": estimate,
        "cover_sum": { "exponent": d, "rows": sums, "note": COVER_SUM_NOTE },
    });
    let mut config = json!({ "preset": match args.preset { Preset::Spqr => "spqr", Preset::Cantor => "cantor" } });
    if args.preset == Preset::Spqr {
        let params = params(&args.triple)?;
        let mut closed = serde_json::Map::new();
        let mut sequences = serde_json::Map::new();
        for c in [RCoefficient::Two, RCoefficient::Four] {
            let key = format!("c{}", c.value());
            closed.insert(key.clone(), moran_entry(&MoranProblem::reduced(&params, c)?, args.tol)?);
            let seq = subsystem_sequence(&params, args.n_max, c, args.tol)?;
            let mut v = to_value(&seq);
            v["strictly_increasing"] = json!(seq.strictly_increasing());
            v["limit_check"] = json!(closed_form_dimension(&params, c, args.tol)?);
            sequences.insert(key, v);
        }
        result["closed_form"] = Value::Object(closed);
        result["subsystem"] = Value::Object(sequences);
        result["note"] = json!(COEFFICIENT_NOTE);
        config = triple_json(&args.triple);
        config["preset"] = json!("spqr");
    }
    config["tol"] = json!(args.tol);
    config["n_max"] = json!(args.n_max);
    config["depth"] = json!(args.depth);
    let table = box_table(&estimate)?;
    Ok(Outcome::new("dimension", config, result, true).with_file("boxcount.csv", table))
}

fn scan_summary(res: &ScanResult) -> Value {
    let witnesses: Vec<Value> = res
        .bad_entries()
        .take(20)
        .map(to_value)
        .collect();
    json!({
        "m": res.m,
        "n": res.n,
        "domain": res.domain,
        "grid_size": res.grid_size,
        "depth": res.depth,
        "scanned": res.entries.len(),
        "bad_count": res.bad_count,
        "bad_fraction": res.bad_fraction,
        "bad_box_dimension": res.bad_box_dimension,
        "dimension_bound": res.dimension_bound,
        "note": res.note,
        "first_witnesses": witnesses,
    })
}

fn scan_table(res: &ScanResult) -> Result<String, CliError> {
    csv_string(
        &["q_num", "q_den", "class", "resolving_depth", "witness_w1", "witness_w2"],
        |w| {
            for e in &res.entries {
                let (class, depth, w1, w2) = match &e.class {
                    Classification::Separated { resolving_depth } => {
                        ("separated", resolving_depth.to_string(), String::new(), String::new())
                    }
                    Classification::Intersecting { w1, w2 } => {
                        ("intersecting", String::new(), w1.to_string(), w2.to_string())
                    }
                };
                w.write_record([
                    e.q.numer().to_string(),
                    e.q.denom().to_string(),
                    class.to_string(),
                    depth,
                    w1,
                    w2,
                ])?;
            }
            Ok(())
        },
    )
}

pub fn scan(args: &ScanArgs) -> Result<Outcome, CliError> {
    let t = &args.triple;
    if t.relaxed {
        return Err(CliError::Usage("scan works in paper mode only".into()));
    }
    let mut outcome_ok = true;
    let mut results = Vec::new();
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    for &(m, n) in &args.mn.0 {
        let res = scan_delta_mn(&t.p, &t.r, m, n, args.grid, args.depth).map_err(|e| match e {
            ifs_core::Error::ParameterOutOfRange { .. } | ifs_core::Error::InvalidArgument(_) | ifs_core::Error::DepthCap { .. } => {
                CliError::Usage(e.to_string())
            }
            other => other.into(),
        })?;
        if res.domain.is_none() {
            let msg = format!("D_{m}{n} is empty for these p, r; nothing scanned");
            eprintln!("warning: {msg}");
            warnings.push(msg);
        }
        let mut summary = scan_summary(&res);
        if args.samples > 0 {
            if let Some(d) = dmn_interval(&t.p, &t.r, m, n) {
                let w = d.width();
                let q1 = d.lo() + &w / Scalar::from_int(3);
                let q2 = d.lo() + &w * Scalar::new(2, 3);
                let rep = verify_tech2(&t.p, &t.r, m, n, &q1, &q2, args.samples, 8, args.seed)?;
                outcome_ok &= rep.passed();
                summary["anti_lipschitz"] = to_value(&rep);
            }
        }
        files.push((format!("scan_m{m}_n{n}.csv"), scan_table(&res)?));
        results.push(summary);
    }
    let mut result = json!({ "scans": results, "warnings": warnings });
    if args.samples > 0 {
        let q2 = &t.q + &args.delta;
        let rep = verify_displacement(&t.p, &t.q, &q2, &t.r, args.samples, 12, args.seed)?;
        outcome_ok &= rep.passed();
        result["displacement"] = to_value(&rep);
    }
    let mut config = triple_json(t);
    config["mn"] = json!(args.mn.0);
    config["grid"] = json!(args.grid);
    config["depth"] = json!(args.depth);
    config["samples"] = json!(args.samples);
    config["delta"] = json!(args.delta);
    config["seed"] = json!(args.seed);
    let mut outcome = Outcome::new("scan", config, result, outcome_ok);
    for (name, body) in files {
        outcome = outcome.with_file(&name, body);
    }
    Ok(outcome)
}

pub fn render(args: &RenderArgs) -> Result<Outcome, CliError> {
    let sys = build_spqr(&params(&args.triple)?);
    let svg = render_svg(&sys, args.depth, args.cap).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut config = triple_json(&args.triple);
    config["depth"] = json!(args.depth);
    config["cap"] = json!(args.cap);
    let result = json!({ "rows": args.depth + 1, "file": "render.svg" });
    Ok(Outcome::new("render", config, result, true).with_svg(svg))
}
