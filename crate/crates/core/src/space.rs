use std::collections::BTreeMap;

use crate::countries::{index_documents, AliasTable, CountryGroup, YearIndex};
use crate::embed::{to_f64, EmbeddingModel};

/// A trained model viewed as country-year document vectors.
#[derive(Debug, Clone)]
pub struct DocumentSpace<'m> {
    pub model: &'m EmbeddingModel,
    pub aliases: AliasTable,
    years: YearIndex,
}

impl<'m> DocumentSpace<'m> {
    pub fn new(model: &'m EmbeddingModel, aliases: AliasTable) -> Self {
        let years = index_documents(&model.vocab.doc_labels, &aliases);
        DocumentSpace { model, aliases, years }
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.years.keys().copied()
    }

    /// Canonical country → document row, for one year.
    pub fn countries(&self, year: i32) -> Option<&BTreeMap<String, usize>> {
        self.years.get(&year)
    }

    pub fn row_of(&self, country: &str, year: i32) -> Option<usize> {
        self.years.get(&year)?.get(self.aliases.canonical(country)).copied()
    }

    pub fn vector(&self, row: usize) -> Vec<f64> {
        to_f64(self.model.doc_row(row))
    }

    /// Group members with a document in `year`.
    pub fn members(&self, group: &CountryGroup, year: i32) -> Vec<(&str, usize)> {
        match self.years.get(&year) {
            Some(countries) => group.present(countries, &self.aliases),
            None => Vec::new(),
        }
    }
}
