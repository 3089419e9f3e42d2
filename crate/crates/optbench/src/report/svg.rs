//! Hand-rolled deterministic SVG renderers.
//!
//! Every renderer emits identical bytes for identical inputs, embeds its
//! data grid in a leading comment block, and asserts (never repairs) the
//! invariants of the data it is given.

use crate::metrics::ProfileCurve;
use crate::problems::Problem;
use crate::runner::fmt_f64;

use super::ReportError;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const PLOT_X: f64 = 70.0;
const PLOT_Y: f64 = 40.0;
const PLOT_W: f64 = 560.0;
const PLOT_H: f64 = 490.0;
const LEGEND_X: f64 = 645.0;

/// 12 distinguishable stroke styles: 6 colors x 2 dash patterns.
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];
const DASHES: [&str; 2] = ["none", "8,4"];

pub fn stroke_style(i: usize) -> (&'static str, &'static str) {
    let i = i % (COLORS.len() * DASHES.len());
    (COLORS[i % COLORS.len()], DASHES[i / COLORS.len()])
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

/// Short tick label: up to 4 significant digits, trailing zeros trimmed.
fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    let s = if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    };
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Linear world-to-screen mapping over the fixed plot rectangle.
struct Frame {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        let (xmin, xmax) = pad_if_degenerate(xmin, xmax);
        let (ymin, ymax) = pad_if_degenerate(ymin, ymax);
        Self { xmin, xmax, ymin, ymax }
    }

    fn sx(&self, x: f64) -> f64 {
        PLOT_X + (x - self.xmin) / (self.xmax - self.xmin) * PLOT_W
    }

    fn sy(&self, y: f64) -> f64 {
        PLOT_Y + PLOT_H - (y - self.ymin) / (self.ymax - self.ymin) * PLOT_H
    }
}

fn pad_if_degenerate(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(data_comment: &str) -> Self {
        let mut body = String::with_capacity(8192);
        body.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
             width=\"{WIDTH}\" height=\"{HEIGHT}\" font-family=\"monospace\" font-size=\"13\">\n"
        ));
        body.push_str("<!--data\n");
        body.push_str(&data_comment.replace("--", "__"));
        body.push_str("-->\n");
        body.push_str(&format!(
            "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        Svg { body }
    }

    fn frame_box(&mut self) {
        self.body.push_str(&format!(
            "<rect x=\"{PLOT_X}\" y=\"{PLOT_Y}\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
             fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n"
        ));
    }

    fn title(&mut self, text: &str) {
        self.body.push_str(&format!(
            "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
            PLOT_X + PLOT_W / 2.0,
            xml_escape(text)
        ));
    }

    fn axes(&mut self, frame: &Frame, x_label: &str, y_label: &str) {
        for i in 0..=5 {
            let t = i as f64 / 5.0;
            let xv = frame.xmin + t * (frame.xmax - frame.xmin);
            let yv = frame.ymin + t * (frame.ymax - frame.ymin);
            let sx = frame.sx(xv);
            let sy = frame.sy(yv);
            self.body.push_str(&format!(
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\"/>\n",
                fmt_coord(sx),
                fmt_coord(PLOT_Y + PLOT_H),
                fmt_coord(sx),
                fmt_coord(PLOT_Y + PLOT_H + 6.0)
            ));
            self.body.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                fmt_coord(sx),
                fmt_coord(PLOT_Y + PLOT_H + 22.0),
                fmt_tick(xv)
            ));
            self.body.push_str(&format!(
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\"/>\n",
                fmt_coord(PLOT_X - 6.0),
                fmt_coord(sy),
                fmt_coord(PLOT_X),
                fmt_coord(sy)
            ));
            self.body.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
                fmt_coord(PLOT_X - 10.0),
                fmt_coord(sy + 4.0),
                fmt_tick(yv)
            ));
        }
        self.body.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            PLOT_X + PLOT_W / 2.0,
            PLOT_Y + PLOT_H + 48.0,
            xml_escape(x_label)
        ));
        self.body.push_str(&format!(
            "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" \
             transform=\"rotate(-90 18 {})\">{}</text>\n",
            PLOT_Y + PLOT_H / 2.0,
            PLOT_Y + PLOT_H / 2.0,
            xml_escape(y_label)
        ));
    }

    fn polyline(&mut self, points: &[(f64, f64)], style_index: usize) {
        let (color, dash) = stroke_style(style_index);
        let pts = points
            .iter()
            .map(|(x, y)| format!("{},{}", fmt_coord(*x), fmt_coord(*y)))
            .collect::<Vec<_>>()
            .join(" ");
        self.body.push_str(&format!(
            "<polyline points=\"{pts}\" fill=\"none\" stroke=\"{color}\" \
             stroke-width=\"2\" stroke-dasharray=\"{dash}\"/>\n"
        ));
    }

    fn marker(&mut self, x: f64, y: f64, style_index: usize) {
        let (color, _) = stroke_style(style_index);
        self.body.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{color}\"/>\n",
            fmt_coord(x),
            fmt_coord(y)
        ));
    }

    fn legend(&mut self, labels: &[String]) {
        for (i, label) in labels.iter().enumerate() {
            let y = PLOT_Y + 14.0 + 22.0 * i as f64;
            let (color, dash) = stroke_style(i);
            self.body.push_str(&format!(
                "<line x1=\"{LEGEND_X}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" \
                 stroke-width=\"2\" stroke-dasharray=\"{dash}\"/>\n",
                LEGEND_X + 28.0
            ));
            self.body.push_str(&format!(
                "<text x=\"{}\" y=\"{}\">{}</text>\n",
                LEGEND_X + 34.0,
                y + 4.0,
                xml_escape(label)
            ));
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

/// Axis/label conventions for the three profile families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileStyle {
    PerfLog,
    PerfLinear,
    Data,
    Accuracy,
}

impl ProfileStyle {
    fn x_label(&self) -> &'static str {
        match self {
            ProfileStyle::PerfLog => "log2(tau) (performance ratio)",
            ProfileStyle::PerfLinear => "tau (performance ratio)",
            ProfileStyle::Data => "k (simplex-gradient budgets)",
            ProfileStyle::Accuracy => "gamma (digits of accuracy)",
        }
    }

    fn title(&self) -> &'static str {
        match self {
            ProfileStyle::PerfLog => "Performance profile (log scale)",
            ProfileStyle::PerfLinear => "Performance profile (linear scale)",
            ProfileStyle::Data => "Data profile",
            ProfileStyle::Accuracy => "Accuracy profile",
        }
    }

    fn transform(&self, t: f64) -> f64 {
        match self {
            ProfileStyle::PerfLog => t.log2(),
            _ => t,
        }
    }
}

/// Renders step-function profile curves, one polyline per solver.
pub fn render_profile(curves: &[ProfileCurve], style: ProfileStyle) -> Result<String, ReportError> {
    if curves.is_empty() {
        return Err(ReportError::Validation("no curves to render".into()));
    }
    for c in curves {
        if c.breakpoints.is_empty() {
            return Err(ReportError::Validation(format!(
                "empty curve for `{}`",
                c.solver_id
            )));
        }
        for (t, v) in &c.breakpoints {
            if !(0.0..=1.0).contains(v) {
                return Err(ReportError::Integrity(format!(
                    "curve `{}` has value {v} at {t} outside [0, 1]",
                    c.solver_id
                )));
            }
            if *style.x_label() != *ProfileStyle::Data.x_label() && *t <= 0.0
                && matches!(style, ProfileStyle::PerfLog)
            {
                return Err(ReportError::Validation(format!(
                    "log-scale profile needs positive thresholds, got {t}"
                )));
            }
        }
    }

    let mut data = String::from("solver,threshold,value\n");
    for c in curves {
        for (t, v) in &c.breakpoints {
            data.push_str(&format!("{},{},{}\n", c.solver_id, fmt_f64(*t), fmt_f64(*v)));
        }
    }

    let xs: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.breakpoints.iter().map(|(t, _)| style.transform(*t)))
        .collect();
    let xmin_data = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let xmax_data = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Log-scale performance profiles pin the axis to whole powers of two.
    let (xmin, xmax) = match style {
        ProfileStyle::PerfLog => (0.0, xmax_data.ceil().max(1.0)),
        ProfileStyle::Data => (0.0, xmax_data.max(1.0)),
        _ => (xmin_data, xmax_data),
    };
    let frame = Frame::new(xmin, xmax, 0.0, 1.0);

    let mut svg = Svg::new(&data);
    svg.title(style.title());
    svg.frame_box();
    svg.axes(&frame, style.x_label(), "fraction of problems");
    for (i, c) in curves.iter().enumerate() {
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(c.breakpoints.len() * 2);
        for (j, (t, v)) in c.breakpoints.iter().enumerate() {
            let x = frame.sx(style.transform(*t));
            let y = frame.sy(*v);
            if let Some(&(_, py)) = pts.last() {
                let _ = j;
                pts.push((x, py)); // horizontal segment: step function
            }
            pts.push((x, y));
        }
        svg.polyline(&pts, i);
    }
    svg.legend(&curves.iter().map(|c| c.solver_id.clone()).collect::<Vec<_>>());
    Ok(svg.finish())
}

/// Best-value-so-far against evaluation count, one line per solver.
///
/// Each series must be monotone nonincreasing in its second component.
pub fn render_convergence_plot(
    problem_id: &str,
    series: &[(String, Vec<(f64, f64)>)],
) -> Result<String, ReportError> {
    if series.is_empty() {
        return Err(ReportError::Validation("no convergence traces".into()));
    }
    for (id, pts) in series {
        if pts.is_empty() {
            return Err(ReportError::Validation(format!("empty trace for `{id}`")));
        }
        if pts.windows(2).any(|w| w[1].1 > w[0].1) {
            return Err(ReportError::Integrity(format!(
                "best-so-far trace for `{id}` is not nonincreasing"
            )));
        }
    }

    let mut data = String::from("solver,eval_index,f_best_so_far\n");
    for (id, pts) in series {
        for (e, f) in pts {
            data.push_str(&format!("{id},{},{}\n", fmt_f64(*e), fmt_f64(*f)));
        }
    }

    let all: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let xmax = all.iter().map(|p| p.0).fold(0.0f64, f64::max);
    let ymin = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let ymax = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let frame = Frame::new(0.0, xmax, ymin, ymax);

    let mut svg = Svg::new(&data);
    svg.title(&format!("Convergence: {problem_id}"));
    svg.frame_box();
    svg.axes(&frame, "fundamental evaluations", "best objective value");
    for (i, (_, pts)) in series.iter().enumerate() {
        let screen: Vec<(f64, f64)> =
            pts.iter().map(|(e, f)| (frame.sx(*e), frame.sy(*f))).collect();
        if screen.len() == 1 {
            svg.marker(screen[0].0, screen[0].1, i);
        } else {
            svg.polyline(&screen, i);
        }
    }
    svg.legend(&series.iter().map(|(id, _)| id.clone()).collect::<Vec<_>>());
    Ok(svg.finish())
}

/// Iterate paths in the plane for one 2-variable problem, over an optional
/// shaded background sampled from the objective.
pub fn render_trajectory_plot(
    problem: &Problem,
    series: &[(String, Vec<[f64; 2]>)],
    background: bool,
) -> Result<String, ReportError> {
    if problem.n != 2 {
        return Err(ReportError::Validation(format!(
            "trajectory plots require n = 2; `{}` has n = {} and projection is unsupported",
            problem.id, problem.n
        )));
    }
    if series.is_empty() {
        return Err(ReportError::Validation("no trajectories".into()));
    }
    for (id, pts) in series {
        if pts.is_empty() {
            return Err(ReportError::Validation(format!("empty trajectory for `{id}`")));
        }
    }

    let mut data = String::from("solver,x0,x1\n");
    for (id, pts) in series {
        for p in pts {
            data.push_str(&format!("{id},{},{}\n", fmt_f64(p[0]), fmt_f64(p[1])));
        }
    }

    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    let mut extend = |p: &[f64]| {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    };
    for (_, pts) in series {
        for p in pts {
            extend(p);
        }
    }
    if let Some(xs) = &problem.x_star {
        extend(xs);
    }
    let margin_x = (xmax - xmin).max(1e-6) * 0.1;
    let margin_y = (ymax - ymin).max(1e-6) * 0.1;
    let frame = Frame::new(xmin - margin_x, xmax + margin_x, ymin - margin_y, ymax + margin_y);

    let mut svg = Svg::new(&data);
    svg.title(&format!("Trajectories: {}", problem.id));

    if background {
        // Shaded objective background: rank-scaled grayscale over a grid.
        const CELLS: usize = 24;
        let mut values = Vec::with_capacity(CELLS * CELLS);
        for j in 0..CELLS {
            for i in 0..CELLS {
                let x = frame.xmin + (i as f64 + 0.5) / CELLS as f64 * (frame.xmax - frame.xmin);
                let y = frame.ymin + (j as f64 + 0.5) / CELLS as f64 * (frame.ymax - frame.ymin);
                values.push(problem.objective(&[x, y]));
            }
        }
        let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cw = PLOT_W / CELLS as f64;
        let ch = PLOT_H / CELLS as f64;
        for j in 0..CELLS {
            for i in 0..CELLS {
                let v = values[j * CELLS + i];
                let rank = if sorted.is_empty() || !v.is_finite() {
                    1.0
                } else {
                    sorted.partition_point(|s| *s <= v) as f64 / sorted.len() as f64
                };
                let shade = 250 - (rank * 70.0) as i32;
                svg.body.push_str(&format!(
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" \
                     fill=\"rgb({shade},{shade},{shade})\"/>\n",
                    fmt_coord(PLOT_X + i as f64 * cw),
                    fmt_coord(PLOT_Y + PLOT_H - (j as f64 + 1.0) * ch),
                    fmt_coord(cw + 0.5),
                    fmt_coord(ch + 0.5)
                ));
            }
        }
    }

    svg.frame_box();
    svg.axes(&frame, "x1", "x2");
    for (i, (_, pts)) in series.iter().enumerate() {
        let screen: Vec<(f64, f64)> = pts
            .iter()
            .map(|p| (frame.sx(p[0]), frame.sy(p[1])))
            .collect();
        if screen.len() == 1 {
            svg.marker(screen[0].0, screen[0].1, i);
        } else {
            svg.polyline(&screen, i);
            svg.marker(screen[0].0, screen[0].1, i);
        }
    }
    if let Some(xs) = &problem.x_star {
        let (sx, sy) = (frame.sx(xs[0]), frame.sy(xs[1]));
        svg.body.push_str(&format!(
            "<path d=\"M {} {} L {} {} M {} {} L {} {}\" stroke=\"black\" stroke-width=\"2\"/>\n",
            fmt_coord(sx - 6.0),
            fmt_coord(sy - 6.0),
            fmt_coord(sx + 6.0),
            fmt_coord(sy + 6.0),
            fmt_coord(sx - 6.0),
            fmt_coord(sy + 6.0),
            fmt_coord(sx + 6.0),
            fmt_coord(sy - 6.0)
        ));
    }
    svg.legend(&series.iter().map(|(id, _)| id.clone()).collect::<Vec<_>>());
    Ok(svg.finish())
}

/// Cost against instance size, one line per solver; `cost_label` must state
/// the timing source when the cost is a time.
pub fn render_runtime_plot(
    family: &str,
    series: &[(String, Vec<(f64, f64)>)],
    cost_label: &str,
) -> Result<String, ReportError> {
    if series.is_empty() {
        return Err(ReportError::Validation("no runtime series".into()));
    }
    for (id, pts) in series {
        if pts.len() < 2 {
            return Err(ReportError::Validation(format!(
                "runtime plot needs at least 2 sizes; `{id}` has {}",
                pts.len()
            )));
        }
    }

    let mut data = String::from("solver,n,cost\n");
    for (id, pts) in series {
        for (n, c) in pts {
            data.push_str(&format!("{id},{},{}\n", fmt_f64(*n), fmt_f64(*c)));
        }
    }

    let all: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let xmin = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let ymax = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let frame = Frame::new(xmin, xmax, 0.0, ymax);

    let mut svg = Svg::new(&data);
    svg.title(&format!("Runtime vs size: {family}"));
    svg.frame_box();
    svg.axes(&frame, "instance size n", cost_label);
    for (i, (_, pts)) in series.iter().enumerate() {
        let screen: Vec<(f64, f64)> =
            pts.iter().map(|(n, c)| (frame.sx(*n), frame.sy(*c))).collect();
        svg.polyline(&screen, i);
        for (sx, sy) in &screen {
            svg.marker(*sx, *sy, i);
        }
    }
    svg.legend(&series.iter().map(|(id, _)| id.clone()).collect::<Vec<_>>());
    Ok(svg.finish())
}

/// Pointwise mean of several series sampled at identical sizes.
pub fn mean_over_family(series: &[Vec<(f64, f64)>]) -> Result<Vec<(f64, f64)>, ReportError> {
    if series.is_empty() {
        return Err(ReportError::Validation("mean of no series".into()));
    }
    let sizes: Vec<f64> = series[0].iter().map(|p| p.0).collect();
    for s in series {
        let these: Vec<f64> = s.iter().map(|p| p.0).collect();
        if these != sizes {
            return Err(ReportError::Validation(
                "family aggregation requires identical size grids".into(),
            ));
        }
    }
    Ok(sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mean = series.iter().map(|s| s[i].1).sum::<f64>() / series.len() as f64;
            (n, mean)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Monotonicity;
    use crate::problems::find_problem;

    fn curve(id: &str, pts: &[(f64, f64)]) -> ProfileCurve {
        ProfileCurve::new(id.to_string(), pts.to_vec(), Monotonicity::Nondecreasing).unwrap()
    }

    #[test]
    fn profile_structure_and_determinism() {
        let curves = vec![
            curve("a", &[(1.0, 0.2), (2.0, 0.5), (4.0, 1.0)]),
            curve("b", &[(1.0, 0.0), (2.0, 0.4), (4.0, 0.9)]),
            curve("c", &[(1.0, 0.1), (2.0, 0.1), (4.0, 0.3)]),
            curve("d", &[(1.0, 0.0), (2.0, 0.0), (4.0, 0.0)]),
        ];
        let one = render_profile(&curves, ProfileStyle::PerfLog).unwrap();
        let two = render_profile(&curves, ProfileStyle::PerfLog).unwrap();
        assert_eq!(one, two, "renderer must be deterministic");
        assert_eq!(one.matches("<polyline").count(), 4, "one step polyline per curve");
        for id in ["a", "b", "c", "d"] {
            assert!(one.contains(&format!(">{id}</text>")));
        }
        assert!(one.contains("<!--data"));
        assert!(one.contains("log2(tau)"));
    }

    #[test]
    fn out_of_range_curve_is_an_integrity_error() {
        // Bypass ProfileCurve validation to prove the renderer checks too.
        let bad = ProfileCurve {
            solver_id: "x".to_string(),
            breakpoints: vec![(1.0, 1.5)],
        };
        assert!(matches!(
            render_profile(&[bad], ProfileStyle::PerfLinear),
            Err(ReportError::Integrity(_))
        ));
    }

    #[test]
    fn perf_log_axis_tops_at_ceil_log2() {
        let curves = vec![curve("a", &[(1.0, 0.0), (6.0, 1.0)])];
        let svg = render_profile(&curves, ProfileStyle::PerfLog).unwrap();
        // ceil(log2 6) = 3 is the last x tick label.
        assert!(svg.contains(">3</text>"));
    }

    #[test]
    fn convergence_plot_accepts_monotone_rejects_increase() {
        let good = vec![("s".to_string(), vec![(1.0, 10.0), (50.0, 5.0), (100.0, 5.0), (200.0, 1.0)])];
        let svg = render_convergence_plot("p", &good).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let bad = vec![("s".to_string(), vec![(1.0, 1.0), (2.0, 2.0)])];
        assert!(matches!(
            render_convergence_plot("p", &bad),
            Err(ReportError::Integrity(_))
        ));
    }

    #[test]
    fn single_entry_trace_renders_a_marker() {
        let s = vec![("s".to_string(), vec![(1.0, 3.0)])];
        let svg = render_convergence_plot("p", &s).unwrap();
        assert!(svg.contains("<circle"));
    }

    #[test]
    fn trajectory_requires_two_variables() {
        let p3 = find_problem("sphere-5").unwrap();
        let s = vec![("s".to_string(), vec![[0.0, 0.0]])];
        assert!(matches!(
            render_trajectory_plot(&p3, &s, false),
            Err(ReportError::Validation(_))
        ));
    }

    #[test]
    fn trajectory_vertex_count_matches_trace_length() {
        let p = find_problem("sphere-2").unwrap();
        let pts = vec![[2.0, 2.0], [1.0, 2.0], [1.0, 1.0], [0.0, 0.0]];
        let s = vec![("s".to_string(), pts.clone())];
        let svg = render_trajectory_plot(&p, &s, true).unwrap();
        let poly = svg
            .lines()
            .find(|l| l.starts_with("<polyline"))
            .expect("trajectory polyline");
        let commas = poly.split('"').nth(1).unwrap().split(' ').count();
        assert_eq!(commas, pts.len());
    }

    #[test]
    fn runtime_plot_arithmetic_of_family_mean() {
        let a = vec![(2.0, 1.0), (4.0, 3.0)];
        let b = vec![(2.0, 3.0), (4.0, 5.0)];
        let mean = mean_over_family(&[a.clone(), b]).unwrap();
        assert_eq!(mean, vec![(2.0, 2.0), (4.0, 4.0)]);
        // Idempotence: aggregating two identical series returns the series.
        assert_eq!(mean_over_family(&[a.clone(), a.clone()]).unwrap(), a);
    }

    #[test]
    fn runtime_plot_requires_two_sizes() {
        let s = vec![("s".to_string(), vec![(2.0, 1.0)])];
        assert!(render_runtime_plot("f", &s, "evaluations").is_err());
        let ok = vec![("s".to_string(), vec![(2.0, 1.0), (4.0, 4.0), (8.0, 16.0)])];
        let svg = render_runtime_plot("f", &ok, "CPU time (s)").unwrap();
        assert!(svg.contains("CPU time (s)"));
    }
}
