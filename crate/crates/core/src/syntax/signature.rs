use indexmap::IndexMap;

use super::{Sort, SortTag, EQ};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSig {
    pub args: Vec<SortTag>,
    pub result: Sort,
}

/// Declared constants, relations, functions and variables.
///
/// Variables beyond the declared ones are produced on demand by
/// [`fresh_name`](super::fresh_name); formulas carry the sort of every
/// variable they mention.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    constants: IndexMap<String, Sort>,
    relations: IndexMap<String, Vec<SortTag>>,
    functions: IndexMap<String, FunctionSig>,
    variables: IndexMap<String, Sort>,
}

impl Default for Signature {
    fn default() -> Self {
        Self::new()
    }
}

impl Signature {
    pub fn new() -> Self {
        let mut relations = IndexMap::new();
        relations.insert(EQ.to_string(), vec![SortTag::AgtOrObj, SortTag::AgtOrObj]);
        Signature {
            constants: IndexMap::new(),
            relations,
            functions: IndexMap::new(),
            variables: IndexMap::new(),
        }
    }

    fn taken(&self, name: &str) -> bool {
        self.constants.contains_key(name)
            || self.relations.contains_key(name)
            || self.functions.contains_key(name)
    }

    pub fn add_constant(&mut self, name: &str, sort: Sort) -> Result<()> {
        if self.taken(name) {
            return Err(Error::Semantic(format!("duplicate symbol `{name}`")));
        }
        self.constants.insert(name.to_string(), sort);
        Ok(())
    }

    pub fn add_relation(&mut self, name: &str, args: Vec<SortTag>) -> Result<()> {
        if self.taken(name) {
            return Err(Error::Semantic(format!("duplicate symbol `{name}`")));
        }
        self.relations.insert(name.to_string(), args);
        Ok(())
    }

    pub fn add_function(&mut self, name: &str, args: Vec<SortTag>, result: Sort) -> Result<()> {
        if self.taken(name) {
            return Err(Error::Semantic(format!("duplicate symbol `{name}`")));
        }
        self.functions.insert(name.to_string(), FunctionSig { args, result });
        Ok(())
    }

    pub fn add_variable(&mut self, name: &str, sort: Sort) -> Result<()> {
        if self.variables.contains_key(name) {
            return Err(Error::Semantic(format!("duplicate variable `{name}`")));
        }
        self.variables.insert(name.to_string(), sort);
        Ok(())
    }

    pub fn constant(&self, name: &str) -> Option<Sort> {
        self.constants.get(name).copied()
    }

    pub fn relation(&self, name: &str) -> Option<&[SortTag]> {
        self.relations.get(name).map(Vec::as_slice)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionSig> {
        self.functions.get(name)
    }

    pub fn variable(&self, name: &str) -> Option<Sort> {
        self.variables.get(name).copied()
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.constants.get_index_of(name)
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.get_index_of(name)
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.get_index_of(name)
    }

    /// Constants in declaration order.
    pub fn constants(&self) -> impl Iterator<Item = (&str, Sort)> {
        self.constants.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Relations in declaration order, equality first.
    pub fn relations(&self) -> impl Iterator<Item = (&str, &[SortTag])> {
        self.relations.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, &FunctionSig)> {
        self.functions.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn variables(&self) -> impl Iterator<Item = (&str, Sort)> {
        self.variables.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn num_constants(&self) -> usize {
        self.constants.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn num_functions(&self) -> usize {
        self.functions.len()
    }

    pub fn constants_of(&self, sort: Sort) -> Vec<&str> {
        self.constants()
            .filter(|(_, s)| *s == sort)
            .map(|(n, _)| n)
            .collect()
    }
}
