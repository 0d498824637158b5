//! CSV tables. Floats are written in Rust's shortest round-trip form,
//! lines end in LF.

use std::io::Write;

use crate::estimators::DualityReport;
use crate::montecarlo::{CountRecord, TimeSeriesPoint};

pub const FRINGES_HEADER: [&str; 6] = ["phi_s", "phi_x", "block", "n1", "n2", "pulses"];

pub const DUALITY_HEADER: [&str; 19] = [
    "phi_s",
    "V",
    "V_sigma",
    "D",
    "D_sigma",
    "hmin_formula",
    "hmax_formula",
    "eur_formula",
    "hmin_defn",
    "hmax_defn",
    "eur_defn",
    "wpdr",
    "hmin_formula_sigma",
    "hmax_formula_sigma",
    "eur_formula_sigma",
    "hmin_defn_sigma",
    "hmax_defn_sigma",
    "eur_defn_sigma",
    "wpdr_sigma",
];

pub const TIMESERIES_HEADER: [&str; 5] = ["t", "phi_s", "phi_x", "n1", "n2"];

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn finish<W: Write>(w: csv::Writer<W>) -> csv::Result<()> {
    w.into_inner().map_err(|e| e.into_error())?.flush()?;
    Ok(())
}

pub fn write_fringes<W: Write>(out: W, records: &[CountRecord]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(FRINGES_HEADER)?;
    for r in records {
        w.write_record([
            r.phi_s.to_string(),
            r.phi_x.to_string(),
            r.block.to_string(),
            r.n1.to_string(),
            r.n2.to_string(),
            r.pulses.to_string(),
        ])?;
    }
    finish(w)
}

pub fn write_duality<W: Write>(out: W, reports: &[DualityReport]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(DUALITY_HEADER)?;
    for r in reports {
        let (f, d) = (&r.formula, &r.definition);
        let row = [
            r.phi_s,
            f.v.value,
            f.v.sigma,
            f.d.value,
            f.d.sigma,
            f.h_min_z.value,
            f.h_max_w.value,
            f.eur_sum.value,
            d.h_min_z.value,
            d.h_max_w.value,
            d.eur_sum.value,
            f.wpdr.value,
            f.h_min_z.sigma,
            f.h_max_w.sigma,
            f.eur_sum.sigma,
            d.h_min_z.sigma,
            d.h_max_w.sigma,
            d.eur_sum.sigma,
            f.wpdr.sigma,
        ];
        w.write_record(row.iter().map(f64::to_string))?;
    }
    finish(w)
}

pub fn write_timeseries<W: Write>(out: W, series: &[TimeSeriesPoint]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(TIMESERIES_HEADER)?;
    for p in series {
        w.write_record(
            [p.t, p.phi_s, p.phi_x, p.n1, p.n2]
                .iter()
                .map(f64::to_string),
        )?;
    }
    finish(w)
}
