//! Dense numerics for private states, their companions and entanglement bounds.
//!
//! Composite indices put the leftmost layout part first (most significant).

pub mod error;
pub mod families;
pub mod layout;
pub mod linalg;
pub mod maps;
pub mod measures;
pub mod operator;
pub mod opt;
pub mod povm;
pub mod qudit;
pub mod random;
pub mod states;

pub use error::{Error, Result};
pub use families::{family_construct, Family, FamilyState, StateFamilyParams};
pub use layout::{Part, Party, Role, SystemLayout};
pub use linalg::{CMatrix, C64};
pub use maps::CqState;
pub use measures::BitsValue;
pub use operator::Operator;
pub use opt::{OptConfig, OptResult, PovmParams};
pub use povm::Povm;
pub use qudit::BellIndex;
pub use states::{BellPrivateSpec, PrivateStateSpec};
