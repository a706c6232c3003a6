//! Identity suites behind `flat-check`. Each suite is a trait object so the
//! command can list, filter and run them uniformly.

use pathgeom_core::flat_model::{
    bracket_generating_rank, coframe_pairing, efj_identity_check, frame_bracket_mismatches,
    isotropy_consistent, maurer_cartan_residual, maurer_cartan_residual_with, pairing_is_identity,
    perturbed_coframe, qk_brackets_hold, qk_forms, residual_is_zero, x_fields_span_kernel, Chart,
};
use pathgeom_core::graded_sp::{build, Parabolic};
use pathgeom_core::linalg::q;

pub struct SuiteOutcome {
    pub passed: bool,
    pub detail: String,
}

impl SuiteOutcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        SuiteOutcome {
            passed,
            detail: detail.into(),
        }
    }
}

pub trait CheckSuite {
    fn name(&self) -> &'static str;
    fn run(&self, n: usize) -> Result<SuiteOutcome, String>;
}

fn chart(n: usize) -> Result<Chart, String> {
    Chart::new(n).map_err(|e| e.to_string())
}

struct StructureConstants;
struct MaurerCartan;
struct MaurerCartanControl;
struct Frame;
struct PqFrame;
struct CoframeDuality;
struct Efj;
struct QkContact;
struct Isotropy;
struct GradedDims;

impl CheckSuite for StructureConstants {
    fn name(&self) -> &'static str {
        "structure-constants"
    }
    fn run(&self, n: usize) -> Result<SuiteOutcome, String> {
        let rep = build(n, Parabolic::P12)
            .map_err(|e| e.to_string())?
            .verify_structure_constants();
        Ok(SuiteOutcome::new(
            rep.all_pass(),
            format!("{}/{} relations", rep.passed(), rep.total()),
        ))
    }
}

impl CheckSuite for MaurerCartan {
    fn name(&self) -> &'static str {
        "maurer-cartan"
    }
    fn run(&self, n: usize) -> Result<SuiteOutcome, String> {
        let ok = residual_is_zero(&maurer_cartan_residual(&chart(n)?));
        Ok(SuiteOutcome::new(ok, "d Theta + Theta ^ Theta = 0"))
    }
}

impl CheckSuite for MaurerCartanControl {
    fn name(&self) -> &'static str {
        "maurer-cartan-control"
    }
    fn run(&self, n: usize) -> Result<SuiteOutcome, String> {
        let c = chart(n)?;
        let res = maurer_cartan_residual_with(&c, &perturbed_coframe(&c));
        Ok(SuiteOutcome::new(
            !residual_is_zero(&res),
            "perturbed coframe leaves a nonzero residual",
        ))
    }
}

fn frame_outcome(n: usize, pq: bool) -> Result<SuiteOutcome, String> {
    let c = chart(n)?;
    let alg = build(n, Parabolic::P12).map_err(|e| e.to_string())?;
    let frame = if pq { c.pq_frame() } else { c.frame() };
    let bad = frame_bracket_mismatches(&frame, &alg);
    let pairs = frame.len() * (frame.len() - 1) / 2;
    Ok(SuiteOutcome::new(
        bad.is_empty(),
        format!("{}/{} brackets match g_-", pairs - bad.len(), pairs),
    ))
}

impl CheckSuite for Frame {
    fn name(&self) -> &'static str {
        "frame"
    }
    fn run(&self, n: usize) -> Result<SuiteOutcome, String> {
        frame_outcome(n, false)
    }
}

impl CheckSuite for PqFrame {
    fn name(&self) -> &'static str {
        "pq-frame"
    }
    fn run(&self, n: usize) -> Result<SuiteOutcome, String> {
        frame_outcome(n, true)
    }
}

impl CheckSuite for CoframeDuality {
    fn name(&self) -> &'static str {
        "coframe-duality"
    }
    fn run(&self, n: usize) -> Result<SuiteOutcome, String> {
        let ok = pairing_is_identity(&coframe_pairing(&chart(n)?));
        Ok(SuiteOutcome::new(ok, "coframe is dual to the frame"))
    }
}

impl CheckSuite for Efj {
    fn name(&self) -> &'static str {
        "efj"
    }
    fn run(&self, n: usize) -> Result<SuiteOutcome, String> {
        let rep = efj_identity_check(n).map_err(|e| e.to_string())?;
        let good = rep.relations.iter().filter(|(_, ok)| *ok).count();
        Ok(SuiteOutcome::new(
            rep.all_pass(),
            format!("{}/{} identities", good, rep.relations.len()),
        ))
    }
}

impl CheckSuite for QkContact {
    fn name(&self) -> &'static str {
        "qk-contact"
    }
    fn run(&self, n: usize) -> Result<SuiteOutcome, String> {
        let mut failed = Vec::new();
        for k in 1..n {
            let model = qk_forms(n, k).map_err(|e| e.to_string())?;
            let origin = vec![q(0); model.dim()];
            let ok = x_fields_span_kernel(&model)
                && qk_brackets_hold(&model)
                && bracket_generating_rank(&model, &origin) == model.dim();
            if !ok {
                failed.push(k.to_string());
            }
        }
        let detail = if failed.is_empty() {
            format!("k = 1..{}", n - 1)
        } else {
            format!("failed for k = {}", failed.join(","))
        };
        Ok(SuiteOutcome::new(failed.is_empty(), detail))
    }
}

impl CheckSuite for Isotropy {
    fn name(&self) -> &'static str {
        "isotropy"
    }
    fn run(&self, n: usize) -> Result<SuiteOutcome, String> {
        let mut ok = true;
        for k in 2..n {
            let plus = isotropy_consistent(n, k, 1).map_err(|e| e.to_string())?;
            let minus = isotropy_consistent(n, k, -1).map_err(|e| e.to_string())?;
            ok &= plus && !minus;
        }
        Ok(SuiteOutcome::new(ok, "only the + sign gives symmetric y"))
    }
}

impl CheckSuite for GradedDims {
    fn name(&self) -> &'static str {
        "graded-dims"
    }
    fn run(&self, n: usize) -> Result<SuiteOutcome, String> {
        let alg = build(n, Parabolic::P12).map_err(|e| e.to_string())?;
        let total: usize = alg.bigraded_dims().values().sum();
        Ok(SuiteOutcome::new(
            total == n * (2 * n + 1),
            format!("sum of graded dims = {total}"),
        ))
    }
}

/// All suites in report order.
pub struct SuiteRegistry {
    suites: Vec<Box<dyn CheckSuite>>,
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        SuiteRegistry {
            suites: vec![
                Box::new(StructureConstants),
                Box::new(Frame),
                Box::new(PqFrame),
                Box::new(CoframeDuality),
                Box::new(MaurerCartan),
                Box::new(MaurerCartanControl),
                Box::new(Efj),
                Box::new(QkContact),
                Box::new(Isotropy),
                Box::new(GradedDims),
            ],
        }
    }
}

impl SuiteRegistry {
    pub fn register(&mut self, suite: Box<dyn CheckSuite>) {
        self.suites.push(suite);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.iter().map(|s| s.name()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&dyn CheckSuite> {
        self.suites.iter().find(|s| s.name() == name).map(|b| b.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn CheckSuite> {
        self.suites.iter().map(|b| b.as_ref())
    }
}
