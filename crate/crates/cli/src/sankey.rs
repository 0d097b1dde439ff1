//! Sankey export of the decomposition tree.
//!
//! Links run TV→TE, TV→SE, TE→DE, TE→IE, IE→each mediator and SE→each
//! confounder. Link values are signed contributions to the parent, so the
//! IE links carry `−IE_{x1,x0}` and children add up to their parent.
//!
//! A flow diagram only makes sense when the reported descriptors (TV, TE,
//! DE, IE_{x1,x0}, SE and their components) share one sign, ignoring
//! zeros; otherwise `renderable_as_flow` is false.

use causalfair_core::{ConfounderDecomposition, EffectLedger, MediatorDecomposition};
use serde::{Deserialize, Serialize};

use crate::bundle::Num;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "0")]
    Zero,
}

impl Sign {
    fn of(v: f64) -> Self {
        // Matches the four-decimal rounding of the value itself.
        if Num(v).rounded() == 0.0 {
            Sign::Zero
        } else if v > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub source: String,
    pub target: String,
    /// Signed; the magnitude is the flow width.
    pub value: Num,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sankey {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub renderable_as_flow: bool,
}

/// `mediators` is the decomposition of IE_{x1,x0}; its components are
/// negated on export like IE itself.
pub fn sankey_export(
    l: &EffectLedger,
    mediators: Option<&MediatorDecomposition>,
    confounders: Option<&ConfounderDecomposition>,
) -> Sankey {
    let mut nodes = Vec::new();
    let mut links = Vec::new();
    let mut node = |id: &str, label: String| {
        nodes.push(Node {
            id: id.to_string(),
            label,
        })
    };
    let (x0, x1) = (&l.contrast.x0, &l.contrast.x1);
    node("tv", format!("TV {x0}→{x1}"));
    node("te", "TE".into());
    node("se", "SE".into());
    node("de", "DE".into());
    node("ie", format!("IE {x1}→{x0}"));
    let mut link = |source: &str, target: &str, v: f64| {
        links.push(Link {
            source: source.to_string(),
            target: target.to_string(),
            value: Num(v),
            sign: Sign::of(v),
        })
    };
    link("tv", "te", l.te);
    link("tv", "se", l.se);
    link("te", "de", l.de);
    link("te", "ie", -l.ie_reversed);
    let mut leaves = Vec::new();
    if let Some(m) = mediators {
        for (w, v) in m.order.iter().zip(&m.components) {
            leaves.push((format!("ie:{w}"), w.clone(), "ie", -v));
        }
    }
    if let Some(c) = confounders {
        for (z, v) in c.order.iter().zip(&c.components) {
            leaves.push((format!("se:{z}"), z.clone(), "se", *v));
        }
    }
    for (id, _, parent, v) in &leaves {
        link(parent, id, *v);
    }
    for (id, label, _, _) in leaves {
        node(&id, label);
    }
    let mut reported = vec![l.tv, l.te, l.de, l.ie_reversed, l.se];
    reported.extend(mediators.iter().flat_map(|m| m.components.iter().copied()));
    reported.extend(confounders.iter().flat_map(|c| c.components.iter().copied()));
    let mut signs = reported.into_iter().map(Sign::of).filter(|s| *s != Sign::Zero);
    let first = signs.next();
    let renderable_as_flow = signs.all(|s| Some(s) == first);
    Sankey {
        nodes,
        links,
        renderable_as_flow,
    }
}
