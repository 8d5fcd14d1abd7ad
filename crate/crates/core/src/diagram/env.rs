use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::parser::KEYWORDS;
use super::EnvError;
use crate::finstoch::{FinSet, Flavor, Morphism, WireList};
use crate::grouphopf::FiniteGroup;

/// A named object, possibly carrying a group structure.
#[derive(Clone, Debug)]
pub struct EnvObject {
    pub set: FinSet,
    pub group: Option<FiniteGroup>,
}

/// Names available to a diagram: objects and morphism generators.
#[derive(Clone, Debug, Default)]
pub struct Environment {
    objects: BTreeMap<String, EnvObject>,
    morphisms: BTreeMap<String, Morphism>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectSpec {
    size: usize,
    #[serde(default)]
    group: Option<Vec<Vec<usize>>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WireRef {
    Name(String),
    Size(usize),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixSpec {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MorphismSpec {
    dom: Vec<WireRef>,
    cod: Vec<WireRef>,
    matrix: MatrixSpec,
    #[serde(default)]
    flavor: Option<Flavor>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvFile {
    #[serde(default)]
    objects: BTreeMap<String, ObjectSpec>,
    #[serde(default)]
    morphisms: BTreeMap<String, MorphismSpec>,
}

impl Environment {
    pub fn new() -> Self {
        Environment::default()
    }

    fn check_name(&self, name: &str) -> Result<(), EnvError> {
        if KEYWORDS.contains(&name) {
            return Err(EnvError::Reserved(name.into()));
        }
        if self.objects.contains_key(name) || self.morphisms.contains_key(name) {
            return Err(EnvError::Duplicate(name.into()));
        }
        Ok(())
    }

    pub fn add_object(&mut self, name: &str, size: usize) -> Result<(), EnvError> {
        self.check_name(name)?;
        let set = FinSet::new(size)?;
        self.objects.insert(name.into(), EnvObject { set, group: None });
        Ok(())
    }

    pub fn add_group(&mut self, name: &str, group: FiniteGroup) -> Result<(), EnvError> {
        self.check_name(name)?;
        self.objects.insert(
            name.into(),
            EnvObject {
                set: group.carrier().clone(),
                group: Some(group),
            },
        );
        Ok(())
    }

    pub fn add_morphism(&mut self, name: &str, m: Morphism) -> Result<(), EnvError> {
        self.check_name(name)?;
        self.morphisms.insert(name.into(), m);
        Ok(())
    }

    pub fn object(&self, name: &str) -> Option<&EnvObject> {
        self.objects.get(name)
    }

    pub fn morphism(&self, name: &str) -> Option<&Morphism> {
        self.morphisms.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.objects.contains_key(name) || self.morphisms.contains_key(name)
    }

    pub fn from_json(text: &str) -> Result<Self, EnvError> {
        let file: EnvFile = serde_json::from_str(text)?;
        let mut env = Environment::new();
        for (name, spec) in file.objects {
            match spec.group {
                Some(table) => {
                    let g = FiniteGroup::from_table(table, None)
                        .map_err(|e| EnvError::Group(name.clone(), e.to_string()))?;
                    if g.order() != spec.size {
                        return Err(EnvError::Group(
                            name,
                            format!("table has order {}, size says {}", g.order(), spec.size),
                        ));
                    }
                    env.add_group(&name, g)?;
                }
                None => env.add_object(&name, spec.size)?,
            }
        }
        for (name, spec) in file.morphisms {
            let dom = env.wires(&spec.dom)?;
            let cod = env.wires(&spec.cod)?;
            let matrix = match spec.matrix {
                MatrixSpec::Flat(v) => v,
                MatrixSpec::Rows(r) => r.concat(),
            };
            let m = Morphism::new(dom, cod, matrix, spec.flavor.unwrap_or(Flavor::Stochastic))
                .map_err(|e| EnvError::Morphism(name.clone(), e))?;
            env.add_morphism(&name, m)?;
        }
        Ok(env)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EnvError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    fn wires(&self, refs: &[WireRef]) -> Result<WireList, EnvError> {
        refs.iter()
            .map(|r| match r {
                WireRef::Size(n) => FinSet::new(*n).map_err(EnvError::from),
                WireRef::Name(s) => self
                    .objects
                    .get(s)
                    .map(|o| o.set.clone())
                    .ok_or_else(|| EnvError::UnknownObject(s.clone())),
            })
            .collect()
    }
}
