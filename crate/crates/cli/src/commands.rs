//! The data-producing subcommands: spectrum tables, mode evaluation, norm
//! scans, zero searches, and recoupling reports.

use std::collections::BTreeSet;
use std::path::Path;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use s3curl_core::contact;
use s3curl_core::group::{EulerAngles, GroupPoint};
use s3curl_core::half::HalfInt;
use s3curl_core::modes::{eval_harmonic, project_to_coords, ModeExpansion, ModeIndex};
use s3curl_core::operators::spectrum_table;

use crate::output::{csv_table, emit, json_report, sci, Failure};
use crate::{EvalArgs, Format, NormScanArgs, Quat, RecoupleArgs, SpectrumArgs, ZerosArgs};

fn h(twice: i32) -> HalfInt {
    HalfInt::from_twice(twice)
}

/// Loads a field description file in the JSON expansion schema.
fn load_field(path: &Path) -> Result<ModeExpansion, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    ModeExpansion::from_json(&text)
        .map_err(|e| Failure::Usage(format!("malformed field file {}: {e}", path.display())))
}

#[derive(Serialize)]
struct SpectrumReportRow {
    energy: f64,
    energy_exact: String,
    two_l: i32,
    two_j: i32,
    degeneracy: u64,
    polarisation: String,
    nu_sq_minus_1: String,
}

pub fn spectrum(args: SpectrumArgs) -> Result<(), Failure> {
    let radius = BigRational::from_float(args.radius)
        .ok_or_else(|| Failure::Usage("the radius must be a finite real".into()))?;
    let rows = spectrum_table(h(args.two_spin), h(args.two_lmax), &radius)?;
    let table: Vec<SpectrumReportRow> = rows
        .iter()
        .map(|row| {
            // Dimensionless level nu = E*R; for the vector field each row's
            // degeneracy (2L+1)(2J+1) factors as nu^2 - 1, so the last
            // column cross-checks the multiplicity against the energy.
            let nu = &row.energy * &radius;
            let check = &(&nu * &nu) - &BigRational::one();
            SpectrumReportRow {
                energy: row.energy.to_f64().unwrap_or(f64::NAN),
                energy_exact: row.energy.to_string(),
                two_l: row.l.twice(),
                two_j: row.j_total.twice(),
                degeneracy: row.degeneracy,
                polarisation: row.polarisation.to_string(),
                nu_sq_minus_1: check.to_string(),
            }
        })
        .collect();
    let text = match args.output.format {
        Format::Json => json_report(&table)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = table
                .iter()
                .map(|r| {
                    vec![
                        sci(r.energy),
                        r.energy_exact.clone(),
                        r.two_l.to_string(),
                        r.two_j.to_string(),
                        r.degeneracy.to_string(),
                        r.polarisation.clone(),
                        r.nu_sq_minus_1.clone(),
                    ]
                })
                .collect();
            csv_table(
                &[
                    "energy",
                    "energy_exact",
                    "two_l",
                    "two_j",
                    "degeneracy",
                    "polarisation",
                    "nu_sq_minus_1",
                ],
                &rows,
            )?
        }
    };
    emit(&args.output.out, &text)
}

#[derive(Serialize)]
struct ComponentRow {
    two_m: i32,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct AxisRow {
    axis: &'static str,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct EvalReport {
    mode: ModeLabel,
    radius: f64,
    point: PointLabel,
    euler: EulerLabel,
    components: Vec<ComponentRow>,
    /// Embedded tangent 4-vector; present for the vector field only.
    projected: Option<Vec<AxisRow>>,
    /// The same mode as a one-term expansion in the field-file schema.
    field: serde_json::Value,
}

#[derive(Serialize)]
struct ModeLabel {
    two_spin: i32,
    two_l: i32,
    two_j: i32,
    two_n: i32,
    two_m: i32,
}

#[derive(Serialize)]
struct PointLabel {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Serialize)]
struct EulerLabel {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

fn resolve_point(args: &EvalArgs) -> GroupPoint {
    if let Some(angles) = args.euler {
        return GroupPoint::from_euler(EulerAngles {
            alpha: angles.0[0],
            beta: angles.0[1],
            gamma: angles.0[2],
        });
    }
    let Quat([w, x, y, z]) = args.point.unwrap_or(Quat([1.0, 0.0, 0.0, 0.0]));
    GroupPoint::new(w, x, y, z).normalized()
}

pub fn eval(args: EvalArgs) -> Result<(), Failure> {
    let idx = ModeIndex::new(
        h(args.two_spin),
        h(args.two_l),
        h(args.two_j),
        h(args.two_n),
        h(args.two_m),
    )?;
    let q = resolve_point(&args);
    let value = eval_harmonic(&idx, &q, args.radius);
    let mut labels: Vec<HalfInt> = idx.spin.projections().collect();
    labels.reverse();
    let components: Vec<ComponentRow> = labels
        .iter()
        .map(|&m| {
            let c = value.component(m);
            ComponentRow {
                two_m: m.twice(),
                re: c.re,
                im: c.im,
            }
        })
        .collect();
    let projected = if idx.spin == HalfInt::ONE {
        let p = project_to_coords(&value, &q, args.radius);
        Some(
            ["w", "x", "y", "z"]
                .iter()
                .zip(p.iter())
                .map(|(axis, c)| AxisRow {
                    axis,
                    re: c.re,
                    im: c.im,
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    let field = ModeExpansion::basis(idx, args.radius)?;
    let angles = q.to_euler();
    let report = EvalReport {
        mode: ModeLabel {
            two_spin: idx.spin.twice(),
            two_l: idx.l.twice(),
            two_j: idx.j.twice(),
            two_n: idx.n.twice(),
            two_m: idx.m.twice(),
        },
        radius: args.radius,
        point: PointLabel {
            w: q.w,
            x: q.x,
            y: q.y,
            z: q.z,
        },
        euler: EulerLabel {
            alpha: angles.alpha,
            beta: angles.beta,
            gamma: angles.gamma,
        },
        components,
        projected,
        field: serde_json::from_str(&field.to_json())?,
    };
    let text = match args.output.format {
        Format::Json => json_report(&report)?,
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = report
                .components
                .iter()
                .map(|c| {
                    vec![
                        "component".into(),
                        c.two_m.to_string(),
                        sci(c.re),
                        sci(c.im),
                    ]
                })
                .collect();
            if let Some(p) = &report.projected {
                rows.extend(p.iter().map(|a| {
                    vec!["projected".into(), a.axis.to_string(), sci(a.re), sci(a.im)]
                }));
            }
            csv_table(&["kind", "label", "re", "im"], &rows)?
        }
    };
    emit(&args.output.out, &text)
}

#[derive(Serialize)]
struct NormScanReportOut {
    samples: usize,
    min: f64,
    max: f64,
    mean: f64,
    spread: f64,
    seed: u64,
    tol: f64,
    verdict: String,
}

pub fn norm_scan(args: NormScanArgs) -> Result<(), Failure> {
    let field = load_field(&args.field)?;
    let report = contact::norm_scan(&field, args.samples, args.seed)?;
    let sectors: BTreeSet<(i32, i32)> = field
        .iter()
        .map(|(idx, _)| (idx.l.twice(), idx.j.twice()))
        .collect();
    // The constant-norm classification is defined for a single (L, J)
    // sector; mixed supports get a scan but no verdict.
    let verdict = if sectors.len() == 1 {
        match contact::constant_norm_verdict(&field, args.tol)? {
            contact::NormVerdict::HopfProportional => "hopf_proportional".to_string(),
            contact::NormVerdict::Nonconstant => "nonconstant".to_string(),
        }
    } else {
        "not_applicable".to_string()
    };
    let out = NormScanReportOut {
        samples: report.samples,
        min: report.min,
        max: report.max,
        mean: report.mean,
        spread: report.spread,
        seed: report.seed,
        tol: args.tol,
        verdict,
    };
    let text = match args.output.format {
        Format::Json => json_report(&out)?,
        Format::Csv => csv_table(
            &[
                "samples", "min", "max", "mean", "spread", "seed", "tol", "verdict",
            ],
            &[vec![
                out.samples.to_string(),
                sci(out.min),
                sci(out.max),
                sci(out.mean),
                sci(out.spread),
                out.seed.to_string(),
                sci(out.tol),
                out.verdict.clone(),
            ]],
        )?,
    };
    emit(&args.output.out, &text)
}

pub fn zeros(args: ZerosArgs) -> Result<(), Failure> {
    let field = load_field(&args.field)?;
    let result = contact::find_zero(&field, args.seed)?;
    let text = match args.output.format {
        Format::Json => json_report(&result)?,
        Format::Csv => csv_table(
            &["w", "x", "y", "z", "residual", "iterations", "seed"],
            &[vec![
                sci(result.point[0]),
                sci(result.point[1]),
                sci(result.point[2]),
                sci(result.point[3]),
                sci(result.residual),
                result.iterations.to_string(),
                result.seed.to_string(),
            ]],
        )?,
    };
    emit(&args.output.out, &text)
}

#[derive(Serialize)]
struct RecoupleRow {
    two_l1: i32,
    two_j1: i32,
    two_n1: i32,
    two_m1: i32,
    two_l2: i32,
    two_j2: i32,
    two_n2: i32,
    two_m2: i32,
    two_k_min: i32,
    two_k_max: i32,
    terms: usize,
    constant: Option<ConstantEntry>,
}

#[derive(Serialize)]
struct ConstantEntry {
    re: f64,
    im: f64,
}

pub fn recouple(args: RecoupleArgs) -> Result<(), Failure> {
    let field = load_field(&args.field)?;
    if field.is_empty() {
        return Err(Failure::Usage("the field has no terms to recouple".into()));
    }
    let support: Vec<ModeIndex> = field.iter().map(|(idx, _)| *idx).collect();
    let radius = field.radius();
    let mut rows = Vec::new();
    for (i, a) in support.iter().enumerate() {
        for b in &support[i..] {
            let product = contact::recouple_pair(a, b, radius)?;
            let constant = contact::calibrate(a, b, radius, args.tol, args.seed)?;
            rows.push(RecoupleRow {
                two_l1: a.l.twice(),
                two_j1: a.j.twice(),
                two_n1: a.n.twice(),
                two_m1: a.m.twice(),
                two_l2: b.l.twice(),
                two_j2: b.j.twice(),
                two_n2: b.n.twice(),
                two_m2: b.m.twice(),
                two_k_min: product.k_min.twice(),
                two_k_max: product.k_max.twice(),
                terms: product.terms.len(),
                constant: constant.map(|c: Complex64| ConstantEntry { re: c.re, im: c.im }),
            });
        }
    }
    let text = match args.output.format {
        Format::Json => json_report(&rows)?,
        Format::Csv => {
            let records: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let (c_re, c_im) = match &r.constant {
                        Some(c) => (sci(c.re), sci(c.im)),
                        None => (String::new(), String::new()),
                    };
                    vec![
                        r.two_l1.to_string(),
                        r.two_j1.to_string(),
                        r.two_n1.to_string(),
                        r.two_m1.to_string(),
                        r.two_l2.to_string(),
                        r.two_j2.to_string(),
                        r.two_n2.to_string(),
                        r.two_m2.to_string(),
                        r.two_k_min.to_string(),
                        r.two_k_max.to_string(),
                        r.terms.to_string(),
                        c_re,
                        c_im,
                    ]
                })
                .collect();
            csv_table(
                &[
                    "two_l1",
                    "two_j1",
                    "two_n1",
                    "two_m1",
                    "two_l2",
                    "two_j2",
                    "two_n2",
                    "two_m2",
                    "two_k_min",
                    "two_k_max",
                    "terms",
                    "constant_re",
                    "constant_im",
                ],
                &records,
            )?
        }
    };
    emit(&args.output.out, &text)
}
