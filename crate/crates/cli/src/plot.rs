use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use crate::config::PlotKind;
use crate::Failure;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 64.0;

/// Known CSV layouts and how each is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    /// `N_j` against `j` on a log scale.
    Contraction,
    /// `max R_j` against `2^j`.
    Uniformity,
    /// Strichartz ratio against the dilation `λ`.
    Ladder,
    /// `T_ε/ε` against `ε`.
    Lifespan,
    /// Oracle error against `|ξ|`.
    Propagator,
}

impl Schema {
    fn detect(header: &[String]) -> Option<Schema> {
        let has = |c: &str| header.iter().any(|h| h == c);
        if has("j") && has("N") {
            Some(Schema::Contraction)
        } else if has("j") && has("ratio") {
            Some(Schema::Uniformity)
        } else if has("lambda") && has("ratio") {
            Some(Schema::Ladder)
        } else if has("eps") && has("T_over_eps") {
            Some(Schema::Lifespan)
        } else if has("xi_mag") && has("oracle_err") {
            Some(Schema::Propagator)
        } else {
            None
        }
    }

    fn kind(&self) -> PlotKind {
        match self {
            Schema::Contraction => PlotKind::Semilog,
            _ => PlotKind::Loglog,
        }
    }

    fn columns(&self) -> (&'static str, &'static str) {
        match self {
            Schema::Contraction => ("j", "N"),
            Schema::Uniformity => ("j", "ratio"),
            Schema::Ladder => ("lambda", "ratio"),
            Schema::Lifespan => ("eps", "T_over_eps"),
            Schema::Propagator => ("xi_mag", "oracle_err"),
        }
    }

    fn title(&self) -> &'static str {
        match self {
            Schema::Contraction => "Picard differences N_j",
            Schema::Uniformity => "dyadic ratio max R_j against 2^j",
            Schema::Ladder => "Strichartz ratio along the dilation ladder",
            Schema::Lifespan => "T_eps/eps along the scaling family",
            Schema::Propagator => "propagator error against |xi|",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub svg: String,
    pub schema: Option<Schema>,
    /// Least-squares slope of `ln y` against `x` (semilog) or `ln x` (log-log).
    pub slope: Option<f64>,
    pub points: Vec<(f64, f64)>,
}

impl Plot {
    pub fn is_placeholder(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn plot_file(input: &Path, kind: PlotKind) -> Result<Plot, Failure> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| Failure::Precondition(format!("cannot read {}: {e}", input.display())))?;
    plot_csv(&text, kind)
}

/// Render CSV text produced by an experiment. Comment lines starting with `#`
/// are copied into the SVG.
pub fn plot_csv(text: &str, kind: PlotKind) -> Result<Plot, Failure> {
    let comments: Vec<&str> = text.lines().filter(|l| l.starts_with('#')).collect();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Failure::Precondition(format!("schema mismatch: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let records: Vec<csv::StringRecord> =
        rdr.records().collect::<Result<_, _>>().map_err(|e| Failure::Precondition(format!("schema mismatch: {e}")))?;
    if records.is_empty() {
        return Ok(Plot {
            svg: placeholder(&comments),
            schema: Schema::detect(&header),
            slope: None,
            points: Vec::new(),
        });
    }
    let schema = Schema::detect(&header)
        .ok_or_else(|| Failure::Precondition(format!("schema mismatch: no plot layout for columns {header:?}")))?;
    if kind != PlotKind::Auto && kind != schema.kind() {
        return Err(Failure::Precondition(format!("schema mismatch: {schema:?} data is drawn as {:?}", schema.kind())));
    }
    let (xc, yc) = schema.columns();
    let xi = header.iter().position(|h| h == xc).unwrap();
    let yi = header.iter().position(|h| h == yc).unwrap();
    // Largest y per x, keyed on the exact bit pattern of x.
    let mut best: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for r in &records {
        let parse = |i: usize| -> Result<f64, Failure> {
            r.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Failure::Precondition(format!("schema mismatch: non-numeric field in {r:?}")))
        };
        let mut x = parse(xi)?;
        let y = parse(yi)?;
        if schema == Schema::Uniformity {
            x = 2f64.powf(x);
        }
        let e = best.entry(x.to_bits()).or_insert((x, y));
        if y > e.1 {
            e.1 = y;
        }
    }
    let mut points: Vec<(f64, f64)> = best.into_values().filter(|p| p.1 > 0.0 && p.1.is_finite()).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let log_x = schema.kind() == PlotKind::Loglog;
    let fx = |x: f64| if log_x { x.ln() } else { x };
    let slope = fit_slope(&points.iter().map(|p| (fx(p.0), p.1.ln())).collect::<Vec<_>>());
    let svg = render(schema, &points, log_x, slope, &comments);
    Ok(Plot { svg, schema: Some(schema), slope, points })
}

fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn open(comments: &[&str]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    for c in comments {
        let _ = writeln!(s, "<!-- {} -->", c.trim_start_matches('#').trim().replace("--", "- -"));
    }
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    s
}

fn placeholder(comments: &[&str]) -> String {
    let mut s = open(comments);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="16">no data</text>"#,
        W / 2.0,
        H / 2.0
    );
    s.push_str("</svg>\n");
    s
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(vals: impl Iterator<Item = f64>, log: bool) -> Axis {
        let v: Vec<f64> = vals.map(|x| if log { x.log10() } else { x }).collect();
        let mut lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Axis { lo, hi, log }
    }

    fn unit(&self, x: f64) -> f64 {
        let v = if self.log { x.log10() } else { x };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo as i32, self.hi as i32);
            let stride = ((b - a) / 8).max(1);
            (a..=b).step_by(stride as usize).map(|e| (10f64.powi(e), format!("1e{e}"))).collect()
        } else {
            let span = self.hi - self.lo;
            let step = 10f64.powf(span.log10().floor()).max(1e-300);
            let step = if span / step < 3.0 { step / 2.0 } else { step };
            let mut t = (self.lo / step).ceil() * step;
            let mut out = Vec::new();
            while t <= self.hi + 1e-9 * span {
                out.push((t, format!("{}", (t / step).round() * step)));
                t += step;
            }
            out
        }
    }
}

fn render(schema: Schema, points: &[(f64, f64)], log_x: bool, slope: Option<f64>, comments: &[&str]) -> String {
    let mut s = open(comments);
    let (xc, yc) = schema.columns();
    let xa = Axis::new(points.iter().map(|p| p.0), log_x);
    let ya = Axis::new(points.iter().map(|p| p.1), true);
    let (pw, ph) = (W - 2.0 * MARGIN, H - 2.0 * MARGIN);
    let px = |x: f64| MARGIN + xa.unit(x) * pw;
    let py = |y: f64| H - MARGIN - ya.unit(y) * ph;
    let _ = writeln!(
        s,
        r#"<path d="M{m} {t} V{b} H{r}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    for (v, label) in xa.ticks() {
        let x = px(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{b2}" stroke="black"/>"#,
            b = H - MARGIN,
            b2 = H - MARGIN + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{y}" text-anchor="middle" font-family="sans-serif" font-size="11">{label}</text>"#,
            y = H - MARGIN + 18.0
        );
    }
    for (v, label) in ya.ticks() {
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<line x1="{a}" y1="{y:.2}" x2="{m}" y2="{y:.2}" stroke="black"/>"#,
            a = MARGIN - 5.0,
            m = MARGIN
        );
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{label}</text>"#,
            x = MARGIN - 8.0
        );
    }
    let path: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" stroke="steelblue" stroke-width="2" fill="none"/>"#, path.join(" "));
    for &(x, y) in points {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, px(x), py(y));
    }
    let fit = slope.map(|k| format!(" (slope {k:.4})")).unwrap_or_default();
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14">{}{fit}</text>"#,
        W / 2.0,
        MARGIN / 2.0,
        schema.title()
    );
    let xlabel = if schema == Schema::Uniformity { "2^j".to_string() } else { xc.to_string() };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{xlabel}</text>"#,
        W / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle" font-family="sans-serif" font-size="12">{yc}</text>"#,
        H / 2.0,
        H / 2.0
    );
    s.push_str("</svg>\n");
    s
}
