pub mod bam;
pub mod bench;
pub mod cli;
pub mod corpus;
pub mod families;
pub mod inspect;
pub mod metrics;
pub mod names;
pub mod oracle;
pub mod path;
pub mod proper;
pub mod sesame;
pub mod syntax;
pub mod term;
pub mod typing;
