use factor_approx::factor::FactorKind;
use factor_approx::problems::Solution;
use factor_approx::tables::Table;
use serde::Serialize;

use crate::config::Format;

/// Six significant digits, `%g` style.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, e) = s.split_once('e').unwrap();
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{e}")
    }
}

fn text_cell(v: Option<f64>) -> String {
    v.map(sig6).unwrap_or_else(|| "-".into())
}

fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(String::len).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(header);
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

fn csv_string(header: &[String], rows: &[Vec<String>]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn render_table(t: &Table, format: Format) -> anyhow::Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(t)? + "\n"),
        Format::Csv => {
            let rows: Vec<Vec<String>> = t
                .rows
                .iter()
                .map(|r| r.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()).collect())
                .collect();
            csv_string(&t.columns, &rows)
        }
        Format::Text => {
            let rows: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(|&v| text_cell(v)).collect()).collect();
            let mut out = format!("# {}\n", t.name);
            out.push_str(&aligned(&t.columns, &rows));
            for f in &t.failures {
                out.push_str(&format!("# missing: {f}\n"));
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FactorRecord {
    pub kind: &'static str,
    /// `A` as `[re, im]` (power factors).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<[f64; 2]>,
    /// `n` as `[re, im]` (power factors).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<[f64; 2]>,
    /// `b` as `[re, im]` (exponential factors).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<[f64; 2]>,
}

#[derive(Debug, Serialize)]
pub struct Alternate {
    pub theta: Vec<f64>,
    pub defect: Option<f64>,
}

/// Parameter dump of one approximant.
#[derive(Debug, Serialize)]
pub struct SolveRecord {
    pub problem: &'static str,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    pub order: usize,
    /// Variable of the factors: `x^power` in the working variable.
    pub variable: &'static str,
    pub power: u32,
    /// Prefactor `c x^sigma`.
    pub scale: [f64; 2],
    pub sigma: i32,
    pub factors: Vec<FactorRecord>,
    pub theta: Vec<f64>,
    pub condition_residuals: Vec<f64>,
    pub moment_residual: f64,
    pub defect: Option<f64>,
    pub alternates: Vec<Alternate>,
}

fn pair(z: factor_approx::Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl SolveRecord {
    pub fn new(s: &Solution) -> Self {
        let f = &s.form;
        Self {
            problem: s.problem.name(),
            epsilon: s.problem.epsilon,
            p0: s.problem.p0,
            order: s.k,
            variable: s.problem.benchmark.variable(),
            power: f.power,
            scale: pair(f.prefactor.leading_scale),
            sigma: f.prefactor.zero_exponent,
            factors: f
                .factors
                .iter()
                .map(|g| match g.kind {
                    FactorKind::Power => FactorRecord {
                        kind: "power",
                        node: Some(pair(g.node)),
                        exponent: Some(pair(g.exponent)),
                        rate: None,
                    },
                    FactorKind::Exponential => FactorRecord {
                        kind: "exponential",
                        node: None,
                        exponent: None,
                        rate: Some(pair(g.rate)),
                    },
                })
                .collect(),
            theta: s.theta.clone(),
            condition_residuals: s.residuals.clone(),
            moment_residual: f.residual,
            defect: s.defect,
            alternates: s
                .alternates
                .iter()
                .map(|c| Alternate { theta: c.theta.clone(), defect: c.score })
                .collect(),
        }
    }

    /// `(name, re, im)` triples in a fixed order.
    fn items(&self) -> Vec<(String, f64, f64)> {
        let mut v = vec![("c".to_string(), self.scale[0], self.scale[1])];
        let (mut i, mut j) = (0, 0);
        for f in &self.factors {
            match (f.node, f.exponent, f.rate) {
                (Some(a), Some(n), _) => {
                    i += 1;
                    v.push((format!("A_{i}"), a[0], a[1]));
                    v.push((format!("n_{i}"), n[0], n[1]));
                }
                (_, _, Some(b)) => {
                    j += 1;
                    v.push((format!("b_{j}"), b[0], b[1]));
                }
                _ => {}
            }
        }
        for (m, t) in self.theta.iter().enumerate() {
            v.push((format!("theta_{}", m + 1), *t, 0.0));
        }
        for (m, r) in self.condition_residuals.iter().enumerate() {
            v.push((format!("residual_{}", m + 1), *r, 0.0));
        }
        if let Some(d) = self.defect {
            v.push(("D".into(), d, 0.0));
        }
        v
    }
}

pub fn render_solutions(records: &[SolveRecord], format: Format) -> anyhow::Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(records)? + "\n"),
        Format::Csv => {
            let header: Vec<String> = ["problem", "epsilon", "order", "item", "re", "im"].map(String::from).into();
            let rows: Vec<Vec<String>> = records
                .iter()
                .flat_map(|r| {
                    r.items().into_iter().map(move |(name, re, im)| {
                        vec![r.problem.into(), r.epsilon.to_string(), r.order.to_string(), name, re.to_string(), im.to_string()]
                    })
                })
                .collect();
            csv_string(&header, &rows)
        }
        Format::Text => {
            let mut out = String::new();
            for r in records {
                out.push_str(&format!(
                    "# {} eps={} k={} (factors in {}^{}, prefactor {}^{})\n",
                    r.problem,
                    sig6(r.epsilon),
                    r.order,
                    r.variable,
                    r.power,
                    r.variable,
                    r.sigma
                ));
                let rows: Vec<Vec<String>> = r
                    .items()
                    .into_iter()
                    .map(|(name, re, im)| vec![name, sig6(re), sig6(im)])
                    .collect();
                out.push_str(&aligned(&["item".into(), "re".into(), "im".into()], &rows));
                for a in &r.alternates {
                    let theta: Vec<String> = a.theta.iter().map(|&t| sig6(t)).collect();
                    out.push_str(&format!("# alternate root theta=[{}] D={}\n", theta.join(", "), text_cell(a.defect)));
                }
            }
            Ok(out)
        }
    }
}
