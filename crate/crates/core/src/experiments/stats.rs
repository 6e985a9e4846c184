use serde::Serialize;

/// Mean with a normal-approximation 95% interval, `mean +/- 1.96 * sd / sqrt(m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCi {
    pub count: usize,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

impl MeanCi {
    /// `None` values are skipped; the count reflects only defined values.
    pub fn from_values<I: IntoIterator<Item = Option<f64>>>(values: I) -> MeanCi {
        let xs: Vec<f64> = values.into_iter().flatten().collect();
        let m = xs.len();
        if m == 0 {
            return MeanCi {
                count: 0,
                mean: f64::NAN,
                lower: f64::NAN,
                upper: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / m as f64;
        let half = if m > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            1.96 * (var / m as f64).sqrt()
        } else {
            0.0
        };
        MeanCi {
            count: m,
            mean,
            lower: mean - half,
            upper: mean + half,
        }
    }
}
