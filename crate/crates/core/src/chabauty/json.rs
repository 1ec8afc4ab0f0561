use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::MarkedGroup;
use crate::stallings::GraphJson;

use super::{ChabautyBall, SubgroupHandle};

/// Serialized subgroup handle; predicates have no serialized form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HandleJson {
    Graph { graph: GraphJson },
    Table { table: GraphJson },
    Words { group: MarkedGroup, gens: Vec<String> },
    BsCyclic { n: u32, step: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallJson {
    pub center: HandleJson,
    pub window: Vec<String>,
}

impl HandleJson {
    pub fn from_handle(h: &SubgroupHandle) -> Result<Self> {
        Ok(match h {
            SubgroupHandle::Graph(g) => HandleJson::Graph { graph: g.into() },
            SubgroupHandle::Table(t) => HandleJson::Table { table: t.into() },
            SubgroupHandle::WordList { group, gens } => HandleJson::Words {
                group: group.clone(),
                gens: gens.iter().map(|g| group.format(g)).collect(),
            },
            SubgroupHandle::BsCyclic { n, step } => HandleJson::BsCyclic {
                n: *n,
                step: step.to_string(),
            },
            SubgroupHandle::Predicate(p) => {
                return Err(Error::Unsupported(format!(
                    "predicate subgroup {} has no serialized form",
                    p.name
                )))
            }
        })
    }

    pub fn to_handle(&self) -> Result<SubgroupHandle> {
        Ok(match self {
            HandleJson::Graph { graph } => SubgroupHandle::Graph(graph.to_graph()?),
            HandleJson::Table { table } => SubgroupHandle::Table(table.to_table()?),
            HandleJson::Words { group, gens } => {
                group.validate()?;
                SubgroupHandle::WordList {
                    group: group.clone(),
                    gens: gens.iter().map(|g| group.parse(g)).collect::<Result<_>>()?,
                }
            }
            HandleJson::BsCyclic { n, step } => {
                MarkedGroup::bs(*n).validate()?;
                let step: BigRational = step
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad rational {step:?}")))?;
                SubgroupHandle::BsCyclic { n: *n, step }
            }
        })
    }
}

impl BallJson {
    pub fn from_ball(b: &ChabautyBall) -> Result<Self> {
        let group = b.center.ambient();
        Ok(BallJson {
            center: HandleJson::from_handle(&b.center)?,
            window: b.window.iter().map(|g| group.format(g)).collect(),
        })
    }

    pub fn to_ball(&self) -> Result<ChabautyBall> {
        let center = self.center.to_handle()?;
        let group = center.ambient();
        let window = self.window.iter().map(|g| group.parse(g)).collect::<Result<_>>()?;
        Ok(ChabautyBall::new(center, window))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chabauty::in_ball;
    use crate::group::ball;

    #[test]
    fn ball_round_trip() {
        let g = MarkedGroup::free(2);
        let center = SubgroupHandle::WordList {
            group: g.clone(),
            gens: g.parse_list("aa, b a B").unwrap(),
        };
        let b = ChabautyBall::new(center, ball(&g, 2).unwrap());
        let text = serde_json::to_string(&BallJson::from_ball(&b).unwrap()).unwrap();
        let back: BallJson = serde_json::from_str(&text).unwrap();
        let b2 = back.to_ball().unwrap();
        assert_eq!(b2.window, b.window);
        assert!(in_ball(&b2.center, &b).unwrap());
        let cyc = HandleJson::BsCyclic { n: 2, step: "1/2".into() };
        let h = cyc.to_handle().unwrap();
        assert_eq!(HandleJson::from_handle(&h).unwrap(), cyc);
    }
}
