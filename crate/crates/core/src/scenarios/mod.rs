//! Stage schedules reproducing each construction, and the parameter solver
//! for the rigid weak-mixing family.

mod family;
mod recipes;
mod schedule;

pub use family::{family_alpha, family_table, next_height, solve_sk, FamilyInputs, FamilyRow, FamilyTable};
pub use recipes::{
    continuation_factor, design_two_word, repeated_block, rigid_family, rigid_family_schedule, swap_families,
    two_word_ics, with_continuation, TwoWordDesign, REPEATED_BLOCK, RIGID_FAMILY, SWAP_FAMILIES, TWO_WORD_ICS,
};
pub use schedule::{InitialColumn, InitialTower, StageDescriptor, StageSchedule};
