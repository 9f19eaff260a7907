use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub start: f64,
    pub end: f64,
    pub count: u64,
}

/// Equal-width histogram. Bins are half-open `[start, end)` except the last,
/// which is closed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<Bin>,
}

impl Histogram {
    /// Bins `values` over `[min, max]`. No values gives no bins; a zero-width
    /// range gives a single bin `[v, v]` holding every value.
    pub fn equal_width(values: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let Some(&first) = values.first() else {
            return Histogram::default();
        };
        let (lo, hi) = values
            .iter()
            .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if hi <= lo {
            return Histogram {
                bins: vec![Bin {
                    start: lo,
                    end: hi,
                    count: values.len() as u64,
                }],
            };
        }

        let width = (hi - lo) / bins as f64;
        let mut out: Vec<Bin> = (0..bins)
            .map(|i| Bin {
                start: lo + width * i as f64,
                end: if i + 1 == bins {
                    hi
                } else {
                    lo + width * (i + 1) as f64
                },
                count: 0,
            })
            .collect();
        for &v in values {
            let mut i = (((v - lo) / width).floor() as usize).min(bins - 1);
            // rounding in the division can land one bin off its edges
            while i > 0 && v < out[i].start {
                i -= 1;
            }
            while i + 1 < bins && v >= out[i].end {
                i += 1;
            }
            out[i].count += 1;
        }
        Histogram { bins: out }
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    /// `bin_start,bin_end,count`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_start,bin_end,count\n");
        for b in &self.bins {
            s.push_str(&format!("{},{},{}\n", b.start, b.end, b.count));
        }
        s
    }
}
