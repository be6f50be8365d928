//! Vertex and edge fields with floating or exact rational values.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{LabError, Result};
use crate::graph::ClusterGraph;
use crate::lattice::Site;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericKind {
    Float64,
    Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Values {
    Float(Vec<f64>),
    Rational(Vec<Q>),
}

impl Values {
    pub fn kind(&self) -> NumericKind {
        match self {
            Values::Float(_) => NumericKind::Float64,
            Values::Rational(_) => NumericKind::Rational,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Values::Float(v) => v.len(),
            Values::Rational(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_f64(&self, i: usize) -> f64 {
        match self {
            Values::Float(v) => v[i],
            Values::Rational(v) => v[i].to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.get_f64(i)).collect()
    }

    pub fn float(&self) -> Result<&[f64]> {
        match self {
            Values::Float(v) => Ok(v),
            _ => Err(LabError::Kind("expected float values".into())),
        }
    }

    pub fn rational(&self) -> Result<&[Q]> {
        match self {
            Values::Rational(v) => Ok(v),
            _ => Err(LabError::Kind("expected rational values".into())),
        }
    }

    fn zeros_like(&self, n: usize) -> Values {
        match self {
            Values::Float(_) => Values::Float(vec![0.0; n]),
            Values::Rational(_) => Values::Rational(vec![Q::zero(); n]),
        }
    }
}

/// Function on the vertices of a graph.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub graph: Arc<ClusterGraph>,
    pub values: Values,
}

/// Antisymmetric function on oriented edges, stored per edge for the orientation
/// from the smaller to the larger vertex index.
#[derive(Debug, Clone)]
pub struct EdgeField {
    pub graph: Arc<ClusterGraph>,
    pub values: Values,
}

pub(crate) fn same_graph(a: &Arc<ClusterGraph>, b: &Arc<ClusterGraph>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl ScalarField {
    pub fn new(graph: &Arc<ClusterGraph>, values: Values) -> Result<ScalarField> {
        if values.len() != graph.vertex_count() {
            return Err(LabError::Parameter(format!("field has {} values for {} vertices", values.len(), graph.vertex_count())));
        }
        Ok(ScalarField { graph: graph.clone(), values })
    }

    pub fn from_f64(graph: &Arc<ClusterGraph>, v: Vec<f64>) -> Result<ScalarField> {
        Self::new(graph, Values::Float(v))
    }

    pub fn from_rational(graph: &Arc<ClusterGraph>, v: Vec<Q>) -> Result<ScalarField> {
        Self::new(graph, Values::Rational(v))
    }

    pub fn from_fn_f64(graph: &Arc<ClusterGraph>, f: impl Fn(Site) -> f64) -> ScalarField {
        let v = graph.vertices().iter().map(|&x| f(x)).collect();
        ScalarField { graph: graph.clone(), values: Values::Float(v) }
    }

    pub fn from_fn_rational(graph: &Arc<ClusterGraph>, f: impl Fn(Site) -> Q) -> ScalarField {
        let v = graph.vertices().iter().map(|&x| f(x)).collect();
        ScalarField { graph: graph.clone(), values: Values::Rational(v) }
    }

    pub fn zeros(graph: &Arc<ClusterGraph>, kind: NumericKind) -> ScalarField {
        let n = graph.vertex_count();
        let values = match kind {
            NumericKind::Float64 => Values::Float(vec![0.0; n]),
            NumericKind::Rational => Values::Rational(vec![Q::zero(); n]),
        };
        ScalarField { graph: graph.clone(), values }
    }

    pub fn kind(&self) -> NumericKind {
        self.values.kind()
    }

    pub fn at(&self, x: Site) -> Option<f64> {
        self.graph.vertex_index(x).map(|i| self.values.get_f64(i))
    }

    pub fn at_exact(&self, x: Site) -> Option<Q> {
        let i = self.graph.vertex_index(x)?;
        match &self.values {
            Values::Rational(v) => Some(v[i].clone()),
            Values::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.to_f64()
    }

    /// Pointwise `a*self + b*other`; kinds must agree.
    pub fn combine(&self, a: f64, other: &ScalarField, b: f64) -> Result<ScalarField> {
        if !same_graph(&self.graph, &other.graph) {
            return Err(LabError::Parameter("fields live on different graphs".into()));
        }
        let (x, y) = (self.values.float()?, other.values.float()?);
        let v = x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        ScalarField::from_f64(&self.graph, v)
    }

    pub fn combine_exact(&self, a: &Q, other: &ScalarField, b: &Q) -> Result<ScalarField> {
        if !same_graph(&self.graph, &other.graph) {
            return Err(LabError::Parameter("fields live on different graphs".into()));
        }
        let (x, y) = (self.values.rational()?, other.values.rational()?);
        let v = x.iter().zip(y).map(|(p, r)| a * p + b * r).collect();
        ScalarField::from_rational(&self.graph, v)
    }

    /// CSV with header `x1,...,xd,value`; rationals as `num/den`.
    pub fn to_csv(&self) -> String {
        let d = self.graph.d;
        let mut s = (1..=d).map(|k| format!("x{k}")).collect::<Vec<_>>().join(",");
        s += ",value\n";
        for (i, x) in self.graph.vertices().iter().enumerate() {
            for c in &x[..d] {
                s += &format!("{c},");
            }
            match &self.values {
                Values::Float(v) => s += &format!("{:?}\n", v[i]),
                Values::Rational(v) => s += &format!("{}/{}\n", v[i].numer(), v[i].denom()),
            }
        }
        s
    }
}

impl EdgeField {
    pub fn new(graph: &Arc<ClusterGraph>, values: Values) -> Result<EdgeField> {
        if values.len() != graph.edge_count() {
            return Err(LabError::Parameter("edge field length mismatch".into()));
        }
        Ok(EdgeField { graph: graph.clone(), values })
    }

    pub fn zeros_like(graph: &Arc<ClusterGraph>, kind: NumericKind) -> EdgeField {
        let proto = match kind {
            NumericKind::Float64 => Values::Float(vec![]),
            NumericKind::Rational => Values::Rational(vec![]),
        };
        EdgeField { graph: graph.clone(), values: proto.zeros_like(graph.edge_count()) }
    }

    pub fn kind(&self) -> NumericKind {
        self.values.kind()
    }

    /// Value on the oriented edge `x -> y`, `None` when the edge is not in the graph.
    pub fn oriented(&self, x: Site, y: Site) -> Option<f64> {
        let (i, j) = (self.graph.vertex_index(x)?, self.graph.vertex_index(y)?);
        let k = self.graph.edge_between(i, j)?;
        let v = self.values.get_f64(k);
        Some(if i < j { v } else { -v })
    }

    pub fn oriented_exact(&self, x: Site, y: Site) -> Option<Q> {
        let (i, j) = (self.graph.vertex_index(x)?, self.graph.vertex_index(y)?);
        let k = self.graph.edge_between(i, j)?;
        let v = self.values.rational().ok()?[k].clone();
        Some(if i < j { v } else { -v })
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.values.len()).map(|k| self.values.get_f64(k).abs()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        (0..self.values.len()).map(|k| self.values.get_f64(k).powi(2)).sum::<f64>().sqrt()
    }
}
