//! Classification reports and the implication order between the
//! ergodicity properties.

use serde::Serialize;
use thiserror::Error;

use crate::chain::{ChainAnalysis, CriteriaError};
use crate::diffusion::{DiffusionAnalysis, DiffusionError};
use crate::verdict::{Outcome, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Uniqueness,
    Recurrence,
    Ergodicity,
    /// Exponential ergodicity for chains, the Poincaré inequality for diffusions.
    Exponential,
    DiscreteSpectrum,
    LogSobolev,
    Strong,
    Nash,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::Uniqueness,
        Property::Recurrence,
        Property::Ergodicity,
        Property::Exponential,
        Property::DiscreteSpectrum,
        Property::LogSobolev,
        Property::Strong,
        Property::Nash,
    ];

    pub fn name(self, kind: ModelKind) -> &'static str {
        match self {
            Property::Uniqueness => "uniqueness",
            Property::Recurrence => "recurrence",
            Property::Ergodicity => "ergodicity",
            Property::Exponential => match kind {
                ModelKind::Chain => "exponential-ergodicity",
                ModelKind::Diffusion => "poincare",
            },
            Property::DiscreteSpectrum => "discrete-spectrum",
            Property::LogSobolev => "log-sobolev",
            Property::Strong => "strong-ergodicity",
            Property::Nash => "nash",
        }
    }
}

/// `(weaker, stronger)`: the stronger property implies the weaker one.
pub const IMPLICATIONS: [(Property, Property); 8] = [
    (Property::Uniqueness, Property::Recurrence),
    (Property::Recurrence, Property::Ergodicity),
    (Property::Ergodicity, Property::Exponential),
    (Property::Exponential, Property::DiscreteSpectrum),
    (Property::DiscreteSpectrum, Property::LogSobolev),
    (Property::LogSobolev, Property::Nash),
    (Property::Exponential, Property::Strong),
    (Property::Strong, Property::Nash),
];

/// Whether `stronger` implies `weaker` (reflexive and transitive).
pub fn implies(stronger: Property, weaker: Property) -> bool {
    if stronger == weaker {
        return true;
    }
    IMPLICATIONS
        .iter()
        .any(|&(w, s)| s == stronger && implies(w, weaker))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Chain,
    Diffusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    /// The criterion is only conjectured to characterise the property.
    Conjectured,
    /// The Nash criterion is sufficient and a small gap from necessary.
    SufficientOnly,
    /// The verdict was filled in from another row by the implication order.
    FromLattice,
}

impl Flag {
    pub fn caveat(self) -> &'static str {
        match self {
            Flag::Conjectured => "conjectured criterion",
            Flag::SufficientOnly => "(ε): sufficient, not known to be necessary",
            Flag::FromLattice => "implied by another row",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub property: Property,
    pub name: &'static str,
    pub verdict: Verdict,
    pub flags: Vec<Flag>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub kind: ModelKind,
    pub nu: Option<f64>,
    pub rows: Vec<Row>,
    pub lattice_closure_applied: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Chain(#[from] CriteriaError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error("{stronger:?} holds while the weaker {weaker:?} fails")]
    Contradiction {
        weaker: Property,
        stronger: Property,
        report: Box<ClassificationReport>,
    },
}

impl ClassificationReport {
    fn new(kind: ModelKind, nu: Option<f64>, verdicts: Vec<(Property, Verdict)>) -> Self {
        let rows = verdicts
            .into_iter()
            .map(|(property, verdict)| {
                let mut flags = Vec::new();
                if property == Property::Strong && kind == ModelKind::Diffusion {
                    flags.push(Flag::Conjectured);
                }
                if property == Property::Nash {
                    flags.push(Flag::SufficientOnly);
                }
                Row {
                    property,
                    name: property.name(kind),
                    verdict,
                    flags,
                }
            })
            .collect();
        Self {
            kind,
            nu,
            rows,
            lattice_closure_applied: false,
            notes: Vec::new(),
        }
    }

    pub fn row(&self, property: Property) -> Option<&Row> {
        self.rows.iter().find(|r| r.property == property)
    }

    pub fn outcome(&self, property: Property) -> Option<Outcome> {
        self.row(property).map(|r| r.verdict.outcome)
    }

    /// First pair `(weaker, stronger)` with the stronger row holding and the
    /// weaker one failing.
    pub fn contradiction(&self) -> Option<(Property, Property)> {
        for s in &self.rows {
            for w in &self.rows {
                if s.property != w.property
                    && implies(s.property, w.property)
                    && s.verdict.holds()
                    && w.verdict.fails()
                {
                    return Some((w.property, s.property));
                }
            }
        }
        None
    }

    /// Fills inconclusive rows from the implication order: a holding row
    /// makes every weaker row hold, a failing row makes every stronger row
    /// fail. A contradiction is returned as an error with the unclosed report.
    pub fn close(mut self) -> Result<Self, ClassifyError> {
        if let Some((weaker, stronger)) = self.contradiction() {
            return Err(ClassifyError::Contradiction {
                weaker,
                stronger,
                report: Box::new(self),
            });
        }
        let decided: Vec<(Property, Outcome)> = self
            .rows
            .iter()
            .filter(|r| !r.verdict.is_inconclusive())
            .map(|r| (r.property, r.verdict.outcome))
            .collect();
        let mut notes = Vec::new();
        for row in self.rows.iter_mut().filter(|r| r.verdict.is_inconclusive()) {
            let source = decided.iter().find(|&&(p, o)| match o {
                Outcome::Holds => implies(p, row.property),
                Outcome::Fails => implies(row.property, p),
                Outcome::Inconclusive => false,
            });
            if let Some(&(p, o)) = source {
                row.verdict.outcome = o;
                row.flags.push(Flag::FromLattice);
                notes.push(format!(
                    "{} {} because {} {}",
                    row.name,
                    o.as_str(),
                    p.name(self.kind),
                    o.as_str()
                ));
            }
        }
        self.lattice_closure_applied = true;
        self.notes.extend(notes);
        Ok(self)
    }
}

/// All rows for a chain; the Nash row only when `nu` is given.
pub fn classify_chain(analysis: &ChainAnalysis<'_>, nu: Option<f64>) -> Result<ClassificationReport, ClassifyError> {
    let mut verdicts = vec![
        (Property::Uniqueness, analysis.uniqueness()),
        (Property::Recurrence, analysis.recurrence()),
        (Property::Ergodicity, analysis.ergodicity()),
        (Property::Exponential, analysis.exponential_ergodicity()),
        (Property::DiscreteSpectrum, analysis.discrete_spectrum()),
        (Property::LogSobolev, analysis.log_sobolev()),
        (Property::Strong, analysis.strong_ergodicity()),
    ];
    if let Some(nu) = nu {
        verdicts.push((Property::Nash, analysis.nash(nu)?));
    }
    ClassificationReport::new(ModelKind::Chain, nu, verdicts).close()
}

/// All rows for a diffusion; the Nash row only when `nu` is given.
pub fn classify_diffusion(
    analysis: &DiffusionAnalysis<'_>,
    nu: Option<f64>,
) -> Result<ClassificationReport, ClassifyError> {
    let mut verdicts = vec![
        (Property::Uniqueness, analysis.uniqueness()),
        (Property::Recurrence, analysis.recurrence()),
        (Property::Ergodicity, analysis.ergodicity()),
        (Property::Exponential, analysis.poincare()?),
        (Property::DiscreteSpectrum, analysis.discrete_spectrum()?),
        (Property::LogSobolev, analysis.log_sobolev()?),
        (Property::Strong, analysis.strong_ergodicity()?),
    ];
    if let Some(nu) = nu {
        verdicts.push((Property::Nash, analysis.nash(nu)?));
    }
    ClassificationReport::new(ModelKind::Diffusion, nu, verdicts).close()
}
