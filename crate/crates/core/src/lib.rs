//! Verification of decision knowledge bases: DMN decision tables checked
//! against a description-logic ontology.
#![no_std]

extern crate alloc;

pub mod datatypes;
pub mod dl;
pub mod dmn;
pub mod encoding;
pub mod reasoner;
pub mod sfeel;
pub mod tasks;
