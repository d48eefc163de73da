pub mod app;
pub mod document;
pub mod fixtures;
pub mod owl;
pub mod report;
pub mod syntax;
