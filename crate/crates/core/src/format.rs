//! Number formatting shared by the text outputs.

/// 17 significant digits: enough to round-trip any `f64`.
pub fn exact(x: f64) -> String {
    format!("{x:.16e}")
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-4, 1e12)`.
pub fn sig12(x: f64) -> String {
    sig(x, 12)
}

pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_owned()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}
