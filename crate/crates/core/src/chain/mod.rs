//! The n-block protocol: chained Bell measurements, key broadcast,
//! identity publication, reconstruction and the two validation checks.

pub mod identity;
pub mod ledger;
pub mod protocol;
pub mod types;

pub use identity::{
    encode_block_data, global_identity_states, identity_state, make_identity, reconstruct_identity, validate_1,
    validate_2, IDENTITY_BASIS,
};
pub use ledger::{Action, Actor, Check, LedgerRecord, LogEntry, ReceivedKey, VerdictRecord};
pub use protocol::{build_time_chain, run_honest, ChainParams, ChainState, HonestRun};
pub use types::{all_pass, key_from_outcome, BlockKeyPair, DitString, Identity, TransmissionTriple, Verdict};
