use super::ErrorRecord;
use std::io::Write;

pub const CSV_HEADER: [&str; 12] = [
    "scheme",
    "param",
    "value",
    "rep",
    "seed",
    "mean_err_norm",
    "mean_err_m",
    "std_err_norm",
    "n_unknown",
    "n_sink",
    "comm_range",
    "flags",
];

/// C `%.6g`: six significant digits, trailing zeros dropped, exponent form
/// outside `1e-4 <= |x| < 1e6`.
pub fn format_g6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{x:.*}", (5 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[ErrorRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.scheme.name().to_string(),
            r.param.clone(),
            format_g6(r.value),
            r.rep.to_string(),
            r.seed.to_string(),
            format_g6(r.mean_err_norm),
            format_g6(r.mean_err_m),
            format_g6(r.std_err_norm),
            r.n_unknown.to_string(),
            r.n_sink.to_string(),
            format_g6(r.comm_range),
            r.flags.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
