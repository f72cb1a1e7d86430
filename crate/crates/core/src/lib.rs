pub mod rule_lang;
pub mod kb;
pub mod priors;
pub mod pomdp;
pub mod existence;
pub mod fusion;
pub mod sim;
pub mod experiments;
