/// `%g`-style rendering with six significant digits.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        trim_zeros(format!("{:.*}", (5 - exp).max(0) as usize, x))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Align {
    Left,
    Right,
}

/// Plain aligned text table.
#[derive(Debug, Default)]
pub struct TextTable {
    rows: Vec<Vec<String>>,
    align: Vec<Align>,
}

impl TextTable {
    pub fn new(header: Vec<String>, align: Vec<Align>) -> Self {
        TextTable {
            rows: vec![header],
            align,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let cols = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols)
            .map(|j| {
                self.rows
                    .iter()
                    .filter_map(|r| r.get(j))
                    .map(|c| c.chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let rule: String = "-".repeat(widths.iter().sum::<usize>() + 2 * cols.saturating_sub(1));
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = (0..cols)
                .map(|j| {
                    let cell = row.get(j).map(String::as_str).unwrap_or("");
                    match self.align.get(j).copied().unwrap_or(Align::Right) {
                        Align::Left => format!("{cell:<w$}", w = widths[j]),
                        Align::Right => format!("{cell:>w$}", w = widths[j]),
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
            if i == 0 {
                out.push_str(&rule);
                out.push('\n');
            }
        }
        out
    }
}
