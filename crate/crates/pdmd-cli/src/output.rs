//! CSV and summary formatting. All floating-point CSV values are written in
//! scientific notation with 17 significant digits, so files round-trip
//! bit-exactly and identical invocations produce byte-identical output.

use pdmd::DmdModel;

/// 17 significant digits.
pub fn float(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Eigenvalue counts on and off the unit circle at tolerance 1e-6.
pub struct SpectrumSummary {
    pub total: usize,
    pub on_circle: usize,
    pub discarded: usize,
}

pub fn spectrum_summary(operator: &DmdModel) -> SpectrumSummary {
    let on_circle = operator
        .eigenvalues()
        .iter()
        .filter(|l| (l.norm() - 1.0).abs() <= 1e-6)
        .count();
    let discarded = operator
        .stabilization_record()
        .iter()
        .filter(|e| {
            matches!(
                e.disposition,
                pdmd::dmd::Disposition::DiscardedDivergent
                    | pdmd::dmd::Disposition::DiscardedConvergent
            )
        })
        .count();
    SpectrumSummary { total: operator.eigenvalues().len(), on_circle, discarded }
}
