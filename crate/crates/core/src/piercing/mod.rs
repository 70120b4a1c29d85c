//! Fractional transversals, (p,q) piercing and Helly-type witnesses.

pub mod helly;
pub mod pool;
pub mod pq;

pub use helly::{colorful_helly, fractional_helly_witness, helly_check, ColorfulHelly, FractionalWitness, HellyReport};
pub use pool::{build_pool, Candidate, CandidatePool, PoolOptions, Shrink};
pub use pq::{
    check_pq, fractional_packing, fractional_transversal, pq_pierce, replicate_and_round, verify_certificate,
    PierceOptions, PiercingCertificate, PqCheck,
};
