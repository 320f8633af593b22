//! The six-layer schema: 20 entity classes, 18 relation types, the
//! generation method of each relation and the endpoint pairs it may connect.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Layer {
    Meta,
    Textual,
    Linguistic,
    Conceptual,
    CommentarySpeaker,
    Semantic,
}

impl Layer {
    pub const ALL: [Layer; 6] = [
        Layer::Meta,
        Layer::Textual,
        Layer::Linguistic,
        Layer::Conceptual,
        Layer::CommentarySpeaker,
        Layer::Semantic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Meta => "Meta",
            Layer::Textual => "Textual",
            Layer::Linguistic => "Linguistic",
            Layer::Conceptual => "Conceptual",
            Layer::CommentarySpeaker => "CommentarySpeaker",
            Layer::Semantic => "Semantic",
        }
    }

    /// Entity classes whose home layer is `self`.
    pub fn classes(self) -> impl Iterator<Item = EntityClass> {
        EntityClass::ALL.into_iter().filter(move |c| c.layer() == self)
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layer {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Layer::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown schema name `{0}`")]
pub struct UnknownName(pub String);

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "SCREAMING_SNAKE_CASE")]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: [$name; [$($text),+].len()] = [$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UnknownName;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(UnknownName(s.to_string())),
                }
            }
        }
    };
}

named_enum!(EntityClass {
    Domain => "DOMAIN",
    School => "SCHOOL",
    Book => "BOOK",
    Chapter => "CHAPTER",
    Section => "SECTION",
    Page => "PAGE",
    Sentence => "SENTENCE",
    HanSentence => "HAN_SENTENCE",
    HanvietSentence => "HANVIET_SENTENCE",
    VietnameseSentence => "VIETNAMESE_SENTENCE",
    HanWord => "HAN_WORD",
    HanvietPronunciation => "HANVIET_PRONUNCIATION",
    VietnameseMeaning => "VIETNAMESE_MEANING",
    PhilosophicalConcept => "PHILOSOPHICAL_CONCEPT",
    Expert => "EXPERT",
    Commentary => "COMMENTARY",
    CommentaryChunk => "COMMENTARY_CHUNK",
    Speaker => "SPEAKER",
    Embedding => "EMBEDDING",
    SemanticCluster => "SEMANTIC_CLUSTER",
});

named_enum!(RelationType {
    Contains => "CONTAINS",
    Follows => "FOLLOWS",
    AppearsIn => "APPEARS_IN",
    HasHanForm => "HAS_HAN_FORM",
    HasHanvietForm => "HAS_HANVIET_FORM",
    HasVietnameseTranslation => "HAS_VIETNAMESE_TRANSLATION",
    TranslatesTo => "TRANSLATES_TO",
    PronouncedAs => "PRONOUNCED_AS",
    ExpressesConcept => "EXPRESSES_CONCEPT",
    RelatedTo => "RELATED_TO",
    CoOccursWith => "CO_OCCURS_WITH",
    ProvidesCommentary => "PROVIDES_COMMENTARY",
    Explains => "EXPLAINS",
    Contextualizes => "CONTEXTUALIZES",
    Quotes => "QUOTES",
    SimilarTo => "SIMILAR_TO",
    BelongsToCluster => "BELONGS_TO_CLUSTER",
    HasSemanticRep => "HAS_SEMANTIC_REP",
});

/// How a relation's edges come into existence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GenerationMethod {
    /// Fully automatic, rule based.
    Auto,
    /// Algorithm plus sampled human verification.
    Semi,
    /// Expert defined.
    Manual,
}

impl EntityClass {
    pub fn layer(self) -> Layer {
        use EntityClass::*;
        match self {
            Domain | School => Layer::Meta,
            Book | Chapter | Section | Page | Sentence => Layer::Textual,
            HanSentence | HanvietSentence | VietnameseSentence | HanWord
            | HanvietPronunciation | VietnameseMeaning => Layer::Linguistic,
            PhilosophicalConcept => Layer::Conceptual,
            Expert | Commentary | CommentaryChunk | Speaker => Layer::CommentarySpeaker,
            Embedding | SemanticCluster => Layer::Semantic,
        }
    }
}

impl RelationType {
    pub fn method(self) -> GenerationMethod {
        use RelationType::*;
        match self {
            ExpressesConcept | RelatedTo | Contextualizes => GenerationMethod::Semi,
            ProvidesCommentary | Explains => GenerationMethod::Manual,
            _ => GenerationMethod::Auto,
        }
    }

    /// Relations whose edges carry a numeric weight (similarity or count).
    pub fn is_weighted(self) -> bool {
        use RelationType::*;
        matches!(
            self,
            SimilarTo | Contextualizes | CoOccursWith | BelongsToCluster | ExpressesConcept
        )
    }

    /// Resolve a relation name, accepting the taxonomic aliases that some
    /// exports use for hierarchy links into the Meta layer.
    pub fn parse_with_aliases(name: &str) -> Result<Self, UnknownName> {
        match name {
            "BELONGS_TO_SCHOOL" | "PART_OF_DOMAIN" => Ok(RelationType::Contains),
            "HAS_SEMANTIC_REPRESENTATION" => Ok(RelationType::HasSemanticRep),
            other => other.parse(),
        }
    }

    pub fn allowed_pairs(self) -> &'static [(EntityClass, EntityClass)] {
        use EntityClass::*;
        use RelationType as R;
        match self {
            R::Contains => &[
                (Domain, School),
                (School, Book),
                (Book, Chapter),
                (Chapter, Section),
                (Section, Page),
                (Page, Sentence),
                (Commentary, CommentaryChunk),
            ],
            R::Follows => &[(Sentence, Sentence), (CommentaryChunk, CommentaryChunk)],
            R::AppearsIn => &[(HanWord, HanSentence)],
            R::HasHanForm => &[(Sentence, HanSentence)],
            R::HasHanvietForm => &[(Sentence, HanvietSentence)],
            R::HasVietnameseTranslation => &[(Sentence, VietnameseSentence)],
            R::TranslatesTo => &[(HanWord, VietnameseMeaning)],
            R::PronouncedAs => &[(HanWord, HanvietPronunciation)],
            R::ExpressesConcept => &[
                (Sentence, PhilosophicalConcept),
                (HanSentence, PhilosophicalConcept),
            ],
            R::RelatedTo => &[(PhilosophicalConcept, PhilosophicalConcept)],
            R::CoOccursWith => &[(PhilosophicalConcept, PhilosophicalConcept)],
            R::ProvidesCommentary => &[(Expert, Commentary)],
            R::Explains => &[(Commentary, Section), (CommentaryChunk, Section)],
            R::Contextualizes => &[(CommentaryChunk, Sentence)],
            R::Quotes => &[(Speaker, HanSentence)],
            R::SimilarTo => &[(Embedding, Embedding)],
            R::BelongsToCluster => &[(Embedding, SemanticCluster)],
            R::HasSemanticRep => &[
                (Sentence, Embedding),
                (CommentaryChunk, Embedding),
                (VietnameseSentence, Embedding),
            ],
        }
    }
}

pub fn validate_edge(relation: RelationType, src: EntityClass, dst: EntityClass) -> bool {
    relation.allowed_pairs().contains(&(src, dst))
}

pub fn is_cross_layer(_relation: RelationType, src: EntityClass, dst: EntityClass) -> bool {
    src.layer() != dst.layer()
}

pub fn generation_method(relation: RelationType) -> GenerationMethod {
    relation.method()
}

// ── Machine-readable description ─────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OntologySchema {
    pub layers: Vec<Layer>,
    pub classes: Vec<ClassSchema>,
    pub relations: Vec<RelationSchema>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSchema {
    pub name: EntityClass,
    pub layer: Layer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationSchema {
    pub name: RelationType,
    pub method: GenerationMethod,
    pub weighted: bool,
    pub pairs: Vec<(EntityClass, EntityClass)>,
}

/// The schema as written to `ontology.json`.
pub fn schema() -> OntologySchema {
    OntologySchema {
        layers: Layer::ALL.to_vec(),
        classes: EntityClass::ALL
            .iter()
            .map(|&c| ClassSchema { name: c, layer: c.layer() })
            .collect(),
        relations: RelationType::ALL
            .iter()
            .map(|&r| RelationSchema {
                name: r,
                method: r.method(),
                weighted: r.is_weighted(),
                pairs: r.allowed_pairs().to_vec(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use EntityClass::*;

    #[test]
    fn cardinalities() {
        assert_eq!(Layer::ALL.len(), 6);
        assert_eq!(EntityClass::ALL.len(), 20);
        assert_eq!(RelationType::ALL.len(), 18);
        assert!(RelationType::ALL.iter().all(|r| !r.allowed_pairs().is_empty()));
        let s = schema();
        assert_eq!((s.layers.len(), s.classes.len(), s.relations.len()), (6, 20, 18));
    }

    #[test]
    fn edge_validation() {
        assert!(validate_edge(RelationType::AppearsIn, HanWord, HanSentence));
        assert!(!validate_edge(RelationType::Contains, Sentence, Book));
        assert!(validate_edge(RelationType::Quotes, Speaker, HanSentence));
        assert!(!validate_edge(RelationType::Quotes, HanSentence, Speaker));
    }

    #[test]
    fn validate_matches_rule_table_enumeration() {
        // every (relation, src, dst) triple over the full enum domain
        let mut legal = 0;
        for r in RelationType::ALL {
            for s in EntityClass::ALL {
                for d in EntityClass::ALL {
                    let expected = r.allowed_pairs().iter().any(|&(a, b)| a == s && b == d);
                    assert_eq!(validate_edge(r, s, d), expected);
                    legal += expected as usize;
                }
            }
        }
        assert_eq!(legal, 29);
    }

    #[test]
    fn cross_layer() {
        assert!(is_cross_layer(RelationType::ExpressesConcept, Sentence, PhilosophicalConcept));
        assert!(!is_cross_layer(RelationType::Contains, Book, Chapter));
        assert!(is_cross_layer(RelationType::HasSemanticRep, CommentaryChunk, Embedding));
    }

    #[test]
    fn methods() {
        assert_eq!(generation_method(RelationType::Contains), GenerationMethod::Auto);
        assert_eq!(generation_method(RelationType::Contextualizes), GenerationMethod::Semi);
        assert_eq!(generation_method(RelationType::ProvidesCommentary), GenerationMethod::Manual);
        for r in [RelationType::SimilarTo, RelationType::BelongsToCluster, RelationType::HasSemanticRep] {
            assert_eq!(r.method(), GenerationMethod::Auto);
        }
    }

    #[test]
    fn names_round_trip_and_aliases() {
        for c in EntityClass::ALL {
            assert_eq!(c.as_str().parse::<EntityClass>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.as_str()));
        }
        for r in RelationType::ALL {
            assert_eq!(r.as_str().parse::<RelationType>().unwrap(), r);
            assert_eq!(serde_json::to_string(&r).unwrap(), format!("\"{}\"", r.as_str()));
        }
        assert_eq!(RelationType::parse_with_aliases("BELONGS_TO_SCHOOL").unwrap(), RelationType::Contains);
        assert_eq!(RelationType::parse_with_aliases("PART_OF_DOMAIN").unwrap(), RelationType::Contains);
        assert!("LIKES".parse::<RelationType>().is_err());
    }
}
