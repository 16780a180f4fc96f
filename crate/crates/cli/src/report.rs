//! Comparison tables across options and approaches, cost series, and
//! verification/drill summaries.

use std::fmt::Write as _;

use otn_design::design::Design;
use otn_design::evaluate::DrillReport;
use otn_design::{Approach, Survivability, Violation};

/// Percentage with one decimal below 2, whole numbers otherwise.
pub fn pct(x: f64) -> String {
    if x.abs() < 2.0 {
        format!("{x:.1}")
    } else {
        format!("{x:.0}")
    }
}

/// Saving of `x` relative to `max`, in percent.
fn saving(x: f64, max: f64) -> f64 {
    if max > 0.0 {
        100.0 * (max - x) / max
    } else {
        0.0
    }
}

fn cost(d: &Design) -> (f64, f64) {
    d.cost.map(|c| (c.total, c.optical_layer)).unwrap_or((0.0, 0.0))
}

/// Renders rows as aligned text with `|` separators.
fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (i, r) in rows.iter().enumerate() {
        let cells: Vec<String> = r.iter().enumerate().map(|(c, s)| format!("{s:<w$}", w = widths[c])).collect();
        let _ = writeln!(out, "{}", cells.join(" | ").trim_end());
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            let _ = writeln!(out, "{}", rule.join("-+-"));
        }
    }
    out
}

/// Side-by-side comparison of designs (one column per design). Spare
/// carriers and BRS extra wavelengths go in parentheses; costs show the
/// saving with respect to the most expensive design when there is more
/// than one.
pub fn comparison_rows(designs: &[&Design]) -> Vec<Vec<String>> {
    let max_total = designs.iter().map(|d| cost(d).0).fold(0.0, f64::max);
    let max_optical = designs.iter().map(|d| cost(d).1).fold(0.0, f64::max);
    let many = designs.len() > 1;
    let with_saving = |x: f64, max: f64| {
        let s = saving(x, max);
        if many && s > 0.0 {
            format!("{x:.0} ({}%)", pct(s))
        } else {
            format!("{x:.0}")
        }
    };
    let mut rows = vec![std::iter::once("Metric".to_string())
        .chain(designs.iter().map(|d| d.survivability.label().to_string()))
        .collect::<Vec<_>>()];
    let mut push = |name: &str, f: &dyn Fn(&Design) -> String| {
        rows.push(std::iter::once(name.to_string()).chain(designs.iter().map(|d| f(d))).collect());
    };
    push("Transit traffic (Gbps)", &|d| d.metrics.as_ref().map(|m| format!("{}", m.transit_total)).unwrap_or_default());
    push("No. of lightpaths", &|d| {
        let Some(m) = &d.metrics else { return String::new() };
        if d.survivability == Survivability::None {
            m.lightpaths().to_string()
        } else {
            format!("{} ({})", m.lightpaths(), m.spare_lightpaths)
        }
    });
    push("No. of wavelengths", &|d| {
        let Some(m) = &d.metrics else { return String::new() };
        if d.survivability == Survivability::MultiInterlayerBrs {
            format!("{} ({})", m.wavelengths, m.extra_wavelengths)
        } else {
            m.wavelengths.to_string()
        }
    });
    push("Total cost", &|d| with_saving(cost(d).0, max_total));
    push("Optical layer cost", &|d| with_saving(cost(d).1, max_optical));
    rows
}

pub fn comparison_text(designs: &[&Design]) -> String {
    let mut out = String::new();
    for approach in [Approach::Sequential, Approach::Integrated] {
        let group: Vec<&Design> = designs.iter().copied().filter(|d| d.approach == approach).collect();
        if group.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{approach}");
        out.push_str(&aligned(&comparison_rows(&group)));
        out.push('\n');
    }
    out
}

/// One row per design with raw numbers; savings are relative to the most
/// expensive design of the same approach.
pub fn comparison_csv(designs: &[&Design]) -> String {
    let mut out = String::from(
        "option,approach,transit_gbps,lightpaths,spare_lightpaths,protection_lightpaths,wavelengths,extra_wavelengths,reuse_factor,total_cost,optical_cost,total_saving_pct,optical_saving_pct\n",
    );
    for d in designs {
        let Some(m) = &d.metrics else { continue };
        let peers = designs.iter().filter(|p| p.approach == d.approach);
        let max_total = peers.clone().map(|p| cost(p).0).fold(0.0, f64::max);
        let max_optical = peers.map(|p| cost(p).1).fold(0.0, f64::max);
        let (total, optical) = cost(d);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{:.2},{:.2}",
            d.survivability.slug(),
            d.approach.slug(),
            m.transit_total,
            m.lightpaths(),
            m.spare_lightpaths,
            m.protection_lightpaths,
            m.wavelengths,
            m.extra_wavelengths,
            m.reuse_factor.map(|r| format!("{r:.4}")).unwrap_or_default(),
            total,
            optical,
            saving(total, max_total),
            saving(optical, max_optical),
        );
    }
    out
}

/// Percentage reduction of integrated over sequential: wavelengths
/// saved, optical-cost saving and total-cost saving in percent.
pub fn reduction(sequential: &Design, integrated: &Design) -> (i64, f64, f64) {
    let wl = |d: &Design| d.metrics.as_ref().map(|m| m.wavelengths as i64).unwrap_or(0);
    let (st, so) = cost(sequential);
    let (it, io) = cost(integrated);
    (wl(sequential) - wl(integrated), saving(io, so), saving(it, st))
}

pub fn reduction_cell(r: (i64, f64, f64)) -> String {
    format!("{}, {} %, {} %", r.0, pct(r.1), pct(r.2))
}

pub fn approaches_text(pairs: &[(&Design, &Design)]) -> String {
    let mut rows = vec![vec![
        "Option".to_string(),
        "Sequential λ".into(),
        "Integrated λ".into(),
        "Reduction (λ, optical, total)".into(),
    ]];
    for (s, i) in pairs {
        let wl = |d: &Design| d.metrics.as_ref().map(|m| m.wavelengths.to_string()).unwrap_or_default();
        rows.push(vec![s.survivability.label().into(), wl(s), wl(i), reduction_cell(reduction(s, i))]);
    }
    aligned(&rows)
}

pub fn approaches_csv(pairs: &[(&Design, &Design)]) -> String {
    let mut out = String::from(
        "option,sequential_wavelengths,integrated_wavelengths,sequential_cost,integrated_cost,wavelength_reduction,optical_saving_pct,total_saving_pct\n",
    );
    for (s, i) in pairs {
        let wl = |d: &Design| d.metrics.as_ref().map(|m| m.wavelengths).unwrap_or(0);
        let r = reduction(s, i);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.2},{:.2}",
            s.survivability.slug(),
            wl(s),
            wl(i),
            cost(s).0,
            cost(i).0,
            r.0,
            r.1,
            r.2
        );
    }
    out
}

/// Plot-ready cost components per design.
pub fn costs_csv(designs: &[&Design]) -> String {
    let mut out = String::from("option,approach,transit_cost,mpls_layer_cost,optical_layer_cost,total_cost\n");
    for d in designs {
        if let Some(c) = d.cost {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                d.survivability.slug(),
                d.approach.slug(),
                c.transit,
                c.mpls_layer,
                c.optical_layer,
                c.total
            );
        }
    }
    out
}

pub fn violations_text(v: &[Violation]) -> String {
    if v.is_empty() {
        return "no violations\n".into();
    }
    let mut rows = vec![vec!["Rule".to_string(), "Detail".into()]];
    rows.extend(v.iter().map(|x| vec![x.rule.clone(), x.detail.clone()]));
    aligned(&rows)
}

pub fn drill_text(reports: &[DrillReport]) -> String {
    let ids = |v: &[otn_design::LspId]| v.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ");
    let mut rows = vec![vec![
        "Failure".to_string(),
        "Affected".into(),
        "Restored".into(),
        "Lost".into(),
        "Unrestored".into(),
        "Contention".into(),
        "OK".into(),
    ]];
    for r in reports {
        rows.push(vec![
            r.failure.to_string(),
            ids(&r.affected),
            ids(&r.restored),
            ids(&r.lost),
            ids(&r.unrestored),
            r.contention.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "),
            if r.restorable { "yes".into() } else { "no".into() },
        ]);
    }
    let ok = reports.iter().filter(|r| r.restorable).count();
    let mut out = aligned(&rows);
    let _ = writeln!(out, "\n{ok}/{} single failures restorable", reports.len());
    out
}
