//! Ordered subsystem layouts.
//!
//! A layout is an ordered list of labelled parts. Composite basis indices are
//! formed with the leftmost part most significant: for parts with dimensions
//! `d_0, d_1, ..., d_{n-1}` the basis vector `|i_0 i_1 ... i_{n-1}>` has index
//! `((i_0 * d_1 + i_1) * d_2 + ...) + i_{n-1}`. Every constructor and circuit
//! wiring in this crate relies on that convention.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Default cap on the total Hilbert-space dimension of a layout.
pub const DEFAULT_DIM_BUDGET: usize = 4096;

/// Environment variable that overrides [`DEFAULT_DIM_BUDGET`].
pub const BUDGET_ENV: &str = "PRIVSTATE_DIM_BUDGET";

/// The process-wide dimension budget, read once from `PRIVSTATE_DIM_BUDGET`.
pub fn dim_budget() -> usize {
    static BUDGET: OnceLock<usize> = OnceLock::new();
    *BUDGET.get_or_init(|| {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&b| b > 0)
            .unwrap_or(DEFAULT_DIM_BUDGET)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    A,
    B,
    /// Charlie's half facing Alice.
    CA,
    /// Charlie's half facing Bob.
    CB,
    /// Classical registers and other bookkeeping systems.
    Reg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Key,
    Shield,
    Register,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Key => "key",
            Role::Shield => "shield",
            Role::Register => "register",
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Party::A => "A",
            Party::B => "B",
            Party::CA => "CA",
            Party::CB => "CB",
            Party::Reg => "REG",
        };
        f.write_str(s)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Part {
    pub label: String,
    pub dim: usize,
    pub party: Party,
    pub role: Role,
}

impl Part {
    pub fn new(label: impl Into<String>, dim: usize, party: Party, role: Role) -> Self {
        Self { label: label.into(), dim, party, role }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemLayout {
    parts: Vec<Part>,
    dim: usize,
}

impl SystemLayout {
    /// Builds a layout against the process-wide budget.
    pub fn new(parts: Vec<Part>) -> Result<Self> {
        Self::with_budget(parts, dim_budget())
    }

    pub fn with_budget(parts: Vec<Part>, budget: usize) -> Result<Self> {
        let mut dim: usize = 1;
        for (i, p) in parts.iter().enumerate() {
            if p.dim == 0 {
                return Err(Error::ZeroDimension { label: p.label.clone() });
            }
            if parts[..i].iter().any(|q| q.label == p.label) {
                return Err(Error::DuplicateLabel(p.label.clone()));
            }
            dim = dim.checked_mul(p.dim).ok_or(Error::BudgetExceeded { dim: usize::MAX, budget })?;
        }
        if dim > budget {
            return Err(Error::BudgetExceeded { dim, budget });
        }
        Ok(Self { parts, dim })
    }

    /// Convenience constructor from `(label, dim, party, role)` tuples.
    pub fn from_tuples(parts: &[(&str, usize, Party, Role)]) -> Result<Self> {
        Self::new(parts.iter().map(|&(l, d, p, r)| Part::new(l, d, p, r)).collect())
    }

    /// The trivial one-dimensional layout with no parts.
    pub fn scalar() -> Self {
        Self { parts: Vec::new(), dim: 1 }
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.parts.iter().map(|p| p.label.as_str()).collect()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.parts.iter().position(|p| p.label == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn part(&self, label: &str) -> Result<&Part> {
        Ok(&self.parts[self.position(label)?])
    }

    pub fn contains(&self, label: &str) -> bool {
        self.parts.iter().any(|p| p.label == label)
    }

    /// Resolves labels to part positions, rejecting unknown and repeated labels.
    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l)?;
            if out.contains(&p) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Product of the dimensions of the named parts.
    pub fn dim_of(&self, labels: &[&str]) -> Result<usize> {
        Ok(self.positions(labels)?.iter().map(|&p| self.parts[p].dim).product())
    }

    pub fn labels_with_role(&self, role: Role) -> Vec<&str> {
        self.parts.iter().filter(|p| p.role == role).map(|p| p.label.as_str()).collect()
    }

    pub fn labels_with_party(&self, party: Party) -> Vec<&str> {
        self.parts.iter().filter(|p| p.party == party).map(|p| p.label.as_str()).collect()
    }

    /// Labels that are not in `labels`, in layout order.
    pub fn complement(&self, labels: &[&str]) -> Vec<&str> {
        self.parts.iter().filter(|p| !labels.contains(&p.label.as_str())).map(|p| p.label.as_str()).collect()
    }

    /// Sub-layout made of the given parts, in the given order. Never exceeds the budget
    /// since it is a factor of an existing layout.
    pub fn select(&self, labels: &[&str]) -> Result<SystemLayout> {
        let pos = self.positions(labels)?;
        let parts: Vec<Part> = pos.iter().map(|&p| self.parts[p].clone()).collect();
        let dim = parts.iter().map(|p| p.dim).product();
        Ok(Self { parts, dim })
    }

    /// Concatenation of two layouts with disjoint labels.
    pub fn concat(&self, other: &SystemLayout) -> Result<SystemLayout> {
        if let Some(p) = other.parts.iter().find(|p| self.contains(&p.label)) {
            return Err(Error::LabelClash(p.label.clone()));
        }
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        Self::new(parts)
    }

    /// Copy with every label suffixed.
    pub fn with_suffix(&self, suffix: &str) -> SystemLayout {
        let parts = self.parts.iter().map(|p| Part { label: format!("{}{}", p.label, suffix), ..p.clone() }).collect();
        Self { parts, dim: self.dim }
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.parts.len()];
        for i in (0..self.parts.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.parts[i + 1].dim;
        }
        strides
    }

    /// Full-space offsets for every composite index of the parts at `positions`,
    /// taken in the given order (first position most significant). Combined with
    /// the offsets of the complementary parts, `off_a[i] + off_b[j]` enumerates
    /// the full basis exactly once.
    pub fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &p in positions {
            let d = self.parts[p].dim;
            let s = strides[p];
            let mut next = Vec::with_capacity(out.len() * d);
            for &base in &out {
                for k in 0..d {
                    next.push(base + k * s);
                }
            }
            out = next;
        }
        out
    }

    /// Offsets for the named parts and for all remaining parts in layout order.
    pub fn split_offsets(&self, labels: &[&str]) -> Result<(Vec<usize>, Vec<usize>)> {
        let sel = self.positions(labels)?;
        let rest: Vec<usize> = (0..self.parts.len()).filter(|p| !sel.contains(p)).collect();
        Ok((self.offsets(&sel), self.offsets(&rest)))
    }
}

impl fmt::Display for SystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> =
            self.parts.iter().map(|p| format!("{}({},{},{})", p.label, p.dim, p.party, p.role)).collect();
        write!(f, "[{}]", items.join(", "))
    }
}
