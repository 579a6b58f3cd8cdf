pub mod annotation;
pub mod category;
pub mod config;
pub mod corpus;
pub mod curate;
pub mod metrics;
pub mod pipeline;
pub mod provenance;
pub mod rank;
pub mod squad;
pub mod text;
