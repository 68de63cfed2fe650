//! Class identifiers and the name ↔ id registry.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Dense class index. Ids within one dataset run 0..C−1 and are bijective
/// with class names through a [`ClassVocab`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub usize);

impl std::fmt::Display for ClassId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Registry assigning dense [`ClassId`]s to class names in first-appearance
/// order. Names are unique and non-empty.
#[derive(Debug, Clone, Default)]
pub struct ClassVocab {
    names: Vec<String>,
    index: HashMap<String, ClassId>,
}

impl ClassVocab {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `name`, registering it if unseen.
    pub fn intern(&mut self, name: &str) -> Result<ClassId> {
        if name.is_empty() {
            return Err(Error::invalid("class name must be non-empty"));
        }
        if let Some(&id) = self.index.get(name) {
            return Ok(id);
        }
        let id = ClassId(self.names.len());
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    /// Looks up a name without registering it.
    pub fn get(&self, name: &str) -> Option<ClassId> {
        self.index.get(name).copied()
    }

    /// The name owning `id`. Panics if `id` was not issued by this vocab.
    pub fn name(&self, id: ClassId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, id: ClassId) -> bool {
        id.0 < self.names.len()
    }

    /// All ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = ClassId> + '_ {
        (0..self.names.len()).map(ClassId)
    }

    /// (id, name) pairs in ascending id order.
    pub fn entries(&self) -> impl Iterator<Item = (ClassId, &str)> + '_ {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (ClassId(i), n.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intern_is_dense_and_bijective() {
        let mut vocab = ClassVocab::new();
        let a = vocab.intern("albatross").unwrap();
        let b = vocab.intern("warbler").unwrap();
        assert_eq!(a, ClassId(0));
        assert_eq!(b, ClassId(1));
        assert_eq!(vocab.intern("albatross").unwrap(), a);
        assert_eq!(vocab.len(), 2);
        assert_eq!(vocab.name(a), "albatross");
        assert_eq!(vocab.get("warbler"), Some(b));
        assert_eq!(vocab.get("sparrow"), None);
    }

    #[test]
    fn empty_name_rejected() {
        let mut vocab = ClassVocab::new();
        assert!(vocab.intern("").is_err());
    }
}
