use std::fmt::Write as _;

/// Rounds to 12 significant digits and prints the shortest form that reads
/// back as the rounded value. Magnitudes outside `[1e-4, 1e15)` use exponent
/// notation.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}").to_lowercase();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    let magnitude = rounded.abs();
    if (1e-4..1e15).contains(&magnitude) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Accumulates `#` header comments followed by CSV rows.
#[derive(Debug, Default)]
pub struct Report {
    text: String,
}

impl Report {
    pub fn comment(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.text, "# {}", line.as_ref());
    }

    pub fn line(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.text, "{}", line.as_ref());
    }

    pub fn row(&mut self, fields: &[String]) {
        self.line(fields.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}
