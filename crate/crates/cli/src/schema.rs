//! The JSON schemas shipped under `schemas/`, compiled once and applied to
//! every input file before it is deserialized.

use std::sync::OnceLock;

use boon::{Compiler, SchemaIndex, Schemas};
use serde_json::Value;

const BASE: &str = "https://sepkit.invalid/schemas/";

const SOURCES: [(&str, &str); 4] = [
    ("action.schema.json", include_str!("../../../schemas/action.schema.json")),
    ("certificate.schema.json", include_str!("../../../schemas/certificate.schema.json")),
    ("schedule.schema.json", include_str!("../../../schemas/schedule.schema.json")),
    ("transcript.schema.json", include_str!("../../../schemas/transcript.schema.json")),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Action,
    Certificate,
    Schedule,
    Transcript,
}

impl Kind {
    fn file(self) -> &'static str {
        match self {
            Kind::Action => "action.schema.json",
            Kind::Certificate => "certificate.schema.json",
            Kind::Schedule => "schedule.schema.json",
            Kind::Transcript => "transcript.schema.json",
        }
    }
}

struct Compiled {
    schemas: Schemas,
    index: Vec<(Kind, SchemaIndex)>,
}

fn compiled() -> &'static Compiled {
    static CELL: OnceLock<Compiled> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut compiler = Compiler::new();
        for (name, text) in SOURCES {
            let json: Value = serde_json::from_str(text).expect("shipped schema is JSON");
            compiler.add_resource(&format!("{BASE}{name}"), json).expect("shipped schema loads");
        }
        let mut schemas = Schemas::new();
        let index = [Kind::Action, Kind::Certificate, Kind::Schedule, Kind::Transcript]
            .into_iter()
            .map(|k| {
                let idx = compiler
                    .compile(&format!("{BASE}{}", k.file()), &mut schemas)
                    .expect("shipped schema compiles");
                (k, idx)
            })
            .collect();
        Compiled { schemas, index }
    })
}

/// `Err` carries the validator's report, which names the failing location.
pub fn validate(kind: Kind, value: &Value) -> Result<(), String> {
    let c = compiled();
    let idx = c.index.iter().find(|(k, _)| *k == kind).expect("every kind compiled").1;
    c.schemas
        .validate(value, idx)
        .map_err(|e| format!("does not match {}: {e:#}", kind.file()))
}
