//! Deterministic synthetic-corpus generator for end-to-end tests and demos.
//!
//! The generated language is a small templated French-like register over
//! two sources with disjoint content vocabulary ("WGM", war reports, and
//! "WA", archaeology notes). It is built so that:
//!
//! * every lexical-unit occurrence is annotated (possibly as the catch-all
//!   frame), and every annotation is recoverable from the five feature
//!   families, so a well-trained model can approach perfect scores;
//! * one verb is ambiguous between two frames, decided by its object's
//!   lemma through joint decoding;
//! * one template pair is surface-identical and distinguishable only by
//!   dependency attachment (a temporal phrase hanging off either of two
//!   same-lemma verbs), so removing path features costs recall;
//! * a `dans la <noun>` modifier is a time expression under one source's
//!   nouns and a location under the other's, so out-of-source training
//!   mislabels it until in-source documents are added.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::corpus::{Corpus, Document, FrameInstance, FrameLexicon, RoleSpan, Sentence, Token, OTHER_FRAME};
use crate::error::{Error, Result};

/// Seed used by tooling when none is given.
pub const DEFAULT_SEED: u64 = 42;

/// Everything one generation run produces.
#[derive(Debug, Clone)]
pub struct SynthData {
    pub corpus: Corpus,
    pub lexicon: FrameLexicon,
    /// Tab-separated (frame, fe, question) mapping covering the generated
    /// frames.
    pub questions_tsv: &'static str,
}

struct SourceVocab {
    name: &'static str,
    /// Human subjects.
    agents: &'static [&'static str],
    /// Things discovered.
    objects: &'static [&'static str],
    /// Things decided.
    actions: &'static [&'static str],
    /// Attacking organizations.
    units: &'static [&'static str],
    /// Attacked things.
    victims: &'static [&'static str],
    /// Attack origins.
    places: &'static [&'static str],
    /// Nouns after "dans la": temporal in WGM, locative in WA.
    tp_nouns: &'static [&'static str],
    /// Role label carried by the `dans la` phrase.
    tp_fe: &'static str,
    /// Things carried.
    themes: &'static [&'static str],
    /// Carrying destinations.
    goals: &'static [&'static str],
    /// Things worn.
    clothing: &'static [&'static str],
    /// Inanimate subjects of the non-frame "porter sur" sense.
    topics: &'static [&'static str],
}

const WGM: SourceVocab = SourceVocab {
    name: "WGM",
    agents: &["général", "colonel", "capitaine", "sergent", "lieutenant", "éclaireur"],
    objects: &["passage", "dépôt", "convoi", "piège", "plan", "tunnel"],
    actions: &["assaut", "repli", "siège", "débarquement"],
    units: &["brigade", "cavalerie", "flotte", "milice"],
    victims: &["fort", "pont", "camp", "bastion", "garnison"],
    places: &["colline", "crête", "rive", "forêt"],
    tp_nouns: &["nuit", "hiver", "tempête", "aube"],
    tp_fe: "Time",
    themes: &["ravitaillement", "munitions", "dépêche", "carte"],
    goals: &["front", "tranchée", "quartier", "poste"],
    clothing: &["uniforme", "casque", "manteau"],
    topics: &["rapport", "débat", "communiqué"],
};

const WA: SourceVocab = SourceVocab {
    name: "WA",
    agents: &["archéologue", "conservateur", "historien", "épigraphiste", "fouilleur", "géomètre"],
    objects: &["sarcophage", "manuscrit", "mosaïque", "amphore", "sceau", "ossuaire"],
    actions: &["fouille", "inventaire", "relevé", "sondage"],
    units: &["légion", "tribu", "dynastie", "horde"],
    victims: &["temple", "palais", "citadelle", "sanctuaire", "nécropole"],
    places: &["falaise", "plateau", "oasis", "steppe"],
    tp_nouns: &["crypte", "grotte", "vallée", "galerie"],
    tp_fe: "Place",
    themes: &["relique", "tablette", "urne", "stèle"],
    goals: &["musée", "atelier", "réserve", "dépendance"],
    clothing: &["tunique", "toge", "diadème"],
    topics: &["traité", "mémoire", "catalogue"],
};

const YEARS: [&str; 24] = [
    "1895", "1897", "1899", "1901", "1903", "1905", "1907", "1909", "1911", "1913", "1915",
    "1916", "1917", "1918", "1919", "1920", "1921", "1922", "1923", "1925", "1927", "1928",
    "1929", "1930",
];

/// The frame lexicon every generated corpus is annotated against.
pub fn lexicon() -> FrameLexicon {
    FrameLexicon::build(
        vec![
            ("découvrir".into(), vec!["Becoming_aware".into()]),
            ("décider".into(), vec!["Deciding".into()]),
            ("attaque".into(), vec!["Attack".into()]),
            ("porter".into(), vec!["Bringing".into(), "Wearing".into()]),
        ],
        vec![
            (
                "Becoming_aware".into(),
                vec!["Cognizer".into(), "Phenomenon".into(), "Time".into(), "Place".into()],
            ),
            (
                "Deciding".into(),
                vec![
                    "Cognizer".into(),
                    "Decision".into(),
                    "Possibilities".into(),
                    "Explanation".into(),
                    "Time".into(),
                    "Place".into(),
                ],
            ),
            (
                "Attack".into(),
                vec![
                    "Assailant".into(),
                    "Victim".into(),
                    "Source".into(),
                    "Time".into(),
                    "Place".into(),
                ],
            ),
            ("Bringing".into(), vec!["Agent".into(), "Theme".into(), "Goal".into()]),
            ("Wearing".into(), vec!["Wearer".into(), "Clothing".into()]),
        ],
    )
    .expect("builtin lexicon is consistent")
}

fn tk(index: usize, form: &str, lemma: &str, pos: &str, head: Option<usize>, deprel: &str) -> Token {
    Token {
        index,
        form: form.to_string(),
        lemma: lemma.to_string(),
        pos: pos.to_string(),
        head,
        deprel: deprel.to_string(),
    }
}

fn noun(index: usize, lemma: &str, head: Option<usize>, deprel: &str) -> Token {
    tk(index, lemma, lemma, "NOUN", head, deprel)
}

fn det(index: usize, form: &str, head: usize) -> Token {
    tk(index, form, "le", "DET", Some(head), "det")
}

fn adp(index: usize, form: &str, head: usize) -> Token {
    tk(index, form, form, "ADP", Some(head), "case")
}

fn num(index: usize, year: &str, head: Option<usize>, deprel: &str) -> Token {
    tk(index, year, year, "NUM", head, deprel)
}

fn dot(index: usize, head: usize) -> Token {
    tk(index, ".", ".", "PUNCT", Some(head), "punct")
}

fn role(fe: &str, start: usize, end: usize) -> RoleSpan {
    RoleSpan { fe: fe.to_string(), start, end }
}

fn inst(lu: &str, frame: &str, target: Vec<usize>, roles: Vec<RoleSpan>) -> FrameInstance {
    FrameInstance { lu: lu.to_string(), frame: frame.to_string(), target_tokens: target, roles }
}

fn pick<'a>(rng: &mut ChaCha20Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn sentence(doc_id: &str, sid: usize, tokens: Vec<Token>, frames: Vec<FrameInstance>) -> Sentence {
    Sentence { doc_id: doc_id.to_string(), sent_id: format!("s{sid}"), tokens, frames }
}

/// "le <agent> découvrit le <object> dans la <tp> ."
fn discovery_tp(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let agent = pick(rng, v.agents);
    let object = pick(rng, v.objects);
    let tp = pick(rng, v.tp_nouns);
    let tokens = vec![
        det(0, "le", 1),
        noun(1, agent, Some(2), "suj"),
        tk(2, "découvrit", "découvrir", "VERB", None, "root"),
        det(3, "le", 4),
        noun(4, object, Some(2), "obj"),
        adp(5, "dans", 7),
        det(6, "la", 7),
        noun(7, tp, Some(2), "obl"),
        dot(8, 2),
    ];
    let frames = vec![inst(
        "découvrir",
        "Becoming_aware",
        vec![2],
        vec![role("Cognizer", 0, 1), role("Phenomenon", 3, 4), role(v.tp_fe, 5, 7)],
    )];
    sentence(doc, sid, tokens, frames)
}

/// "le <agent> découvrit le <object> en <year> ."
fn discovery_year(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let agent = pick(rng, v.agents);
    let object = pick(rng, v.objects);
    let year = pick(rng, &YEARS);
    let tokens = vec![
        det(0, "le", 1),
        noun(1, agent, Some(2), "suj"),
        tk(2, "découvrit", "découvrir", "VERB", None, "root"),
        det(3, "le", 4),
        noun(4, object, Some(2), "obj"),
        adp(5, "en", 6),
        num(6, year, Some(2), "obl"),
        dot(7, 2),
    ];
    let frames = vec![inst(
        "découvrir",
        "Becoming_aware",
        vec![2],
        vec![role("Cognizer", 0, 1), role("Phenomenon", 3, 4), role("Time", 5, 6)],
    )];
    sentence(doc, sid, tokens, frames)
}

/// "le <agent> se découvrit en <year> ." — the uncovering sense, no frame.
fn discovery_other(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let agent = pick(rng, v.agents);
    let year = pick(rng, &YEARS);
    let tokens = vec![
        det(0, "le", 1),
        noun(1, agent, Some(3), "suj"),
        tk(2, "se", "se", "PRON", Some(3), "refl"),
        tk(3, "découvrit", "découvrir", "VERB", None, "root"),
        adp(4, "en", 5),
        num(5, year, Some(3), "obl"),
        dot(6, 3),
    ];
    let frames = vec![inst("découvrir", OTHER_FRAME, vec![3], vec![])];
    sentence(doc, sid, tokens, frames)
}

/// "le <agent> décida l' <action> dans la <tp> ."
fn decide_tp(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let agent = pick(rng, v.agents);
    let action = pick(rng, v.actions);
    let tp = pick(rng, v.tp_nouns);
    let tokens = vec![
        det(0, "le", 1),
        noun(1, agent, Some(2), "suj"),
        tk(2, "décida", "décider", "VERB", None, "root"),
        det(3, "l'", 4),
        noun(4, action, Some(2), "obj"),
        adp(5, "dans", 7),
        det(6, "la", 7),
        noun(7, tp, Some(2), "obl"),
        dot(8, 2),
    ];
    let frames = vec![inst(
        "décider",
        "Deciding",
        vec![2],
        vec![role("Cognizer", 0, 1), role("Decision", 3, 4), role(v.tp_fe, 5, 7)],
    )];
    sentence(doc, sid, tokens, frames)
}

/// "le <a> décida que le <b> décida l' <action> en <year> ."
///
/// The temporal phrase attaches to the inner verb (nested flavor) or to the
/// outer verb (wide flavor). Both attachment sites share the lemma
/// "décider", so only the dependency path reveals which instance owns the
/// Time role.
fn decide_nested(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let a = pick(rng, v.agents);
    let b = pick(rng, v.agents);
    let action = pick(rng, v.actions);
    let year = pick(rng, &YEARS);
    // 40% nested (inner verb owns the time), 60% wide.
    let nested = rng.gen_range(0..100) < 40;
    let year_head = if nested { 6 } else { 2 };
    let tokens = vec![
        det(0, "le", 1),
        noun(1, a, Some(2), "suj"),
        tk(2, "décida", "décider", "VERB", None, "root"),
        tk(3, "que", "que", "SCONJ", Some(6), "mark"),
        det(4, "le", 5),
        noun(5, b, Some(6), "suj"),
        tk(6, "décida", "décider", "VERB", Some(2), "ccomp"),
        det(7, "l'", 8),
        noun(8, action, Some(6), "obj"),
        adp(9, "en", 10),
        num(10, year, Some(year_head), "obl"),
        dot(11, 2),
    ];
    let outer_roles = if nested {
        vec![role("Cognizer", 0, 1), role("Decision", 3, 10)]
    } else {
        vec![role("Cognizer", 0, 1), role("Decision", 3, 8), role("Time", 9, 10)]
    };
    let mut inner_roles = vec![role("Cognizer", 4, 5), role("Decision", 7, 8)];
    if nested {
        inner_roles.push(role("Time", 9, 10));
    }
    let frames = vec![
        inst("décider", "Deciding", vec![2], outer_roles),
        inst("décider", "Deciding", vec![6], inner_roles),
    ];
    sentence(doc, sid, tokens, frames)
}

/// "l' attaque de la <unit> contre le <victim> en <year> ." — verbless
/// headline, the target noun is the root.
fn attack_headline(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let unit = pick(rng, v.units);
    let victim = pick(rng, v.victims);
    let year = pick(rng, &YEARS);
    let tokens = vec![
        det(0, "l'", 1),
        noun(1, "attaque", None, "root"),
        adp(2, "de", 4),
        det(3, "la", 4),
        noun(4, unit, Some(1), "mod"),
        adp(5, "contre", 7),
        det(6, "le", 7),
        noun(7, victim, Some(1), "mod"),
        adp(8, "en", 9),
        num(9, year, Some(1), "mod"),
        dot(10, 1),
    ];
    let frames = vec![inst(
        "attaque",
        "Attack",
        vec![1],
        vec![role("Assailant", 2, 4), role("Victim", 5, 7), role("Time", 8, 9)],
    )];
    sentence(doc, sid, tokens, frames)
}

/// "le <agent> décrivit l' attaque contre le <victim> dans la <tp> ."
///
/// The trailing phrase modifies the describing verb, not the attack, so it
/// carries no role.
fn attack_described(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let agent = pick(rng, v.agents);
    let victim = pick(rng, v.victims);
    let tp = pick(rng, v.tp_nouns);
    let tokens = vec![
        det(0, "le", 1),
        noun(1, agent, Some(2), "suj"),
        tk(2, "décrivit", "décrire", "VERB", None, "root"),
        det(3, "l'", 4),
        noun(4, "attaque", Some(2), "obj"),
        adp(5, "contre", 7),
        det(6, "le", 7),
        noun(7, victim, Some(4), "mod"),
        adp(8, "dans", 10),
        det(9, "la", 10),
        noun(10, tp, Some(2), "obl"),
        dot(11, 2),
    ];
    let frames = vec![inst("attaque", "Attack", vec![4], vec![role("Victim", 5, 7)])];
    sentence(doc, sid, tokens, frames)
}

/// "le <agent> se sentit d' attaque en <year> ." — the idiom, no frame.
fn attack_other(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let agent = pick(rng, v.agents);
    let year = pick(rng, &YEARS);
    let tokens = vec![
        det(0, "le", 1),
        noun(1, agent, Some(3), "suj"),
        tk(2, "se", "se", "PRON", Some(3), "refl"),
        tk(3, "sentit", "sentir", "VERB", None, "root"),
        adp(4, "d'", 5),
        noun(5, "attaque", Some(3), "obl"),
        adp(6, "en", 7),
        num(7, year, Some(3), "obl"),
        dot(8, 3),
    ];
    let frames = vec![inst("attaque", OTHER_FRAME, vec![5], vec![])];
    sentence(doc, sid, tokens, frames)
}

/// "le <agent> porta le <theme> vers le <goal> ." — the carrying sense;
/// the object's lemma is what separates it from the wearing sense.
fn bring(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let agent = pick(rng, v.agents);
    let theme = pick(rng, v.themes);
    let goal = pick(rng, v.goals);
    let tokens = vec![
        det(0, "le", 1),
        noun(1, agent, Some(2), "suj"),
        tk(2, "porta", "porter", "VERB", None, "root"),
        det(3, "le", 4),
        noun(4, theme, Some(2), "obj"),
        adp(5, "vers", 7),
        det(6, "le", 7),
        noun(7, goal, Some(2), "obl"),
        dot(8, 2),
    ];
    let frames = vec![inst(
        "porter",
        "Bringing",
        vec![2],
        vec![role("Agent", 0, 1), role("Theme", 3, 4), role("Goal", 5, 7)],
    )];
    sentence(doc, sid, tokens, frames)
}

/// "le <agent> porta le <clothing> dans la <tp> ." — the wearing sense;
/// its frame has no time or place role, so the modifier stays unannotated.
fn wear(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let agent = pick(rng, v.agents);
    let clothing = pick(rng, v.clothing);
    let tp = pick(rng, v.tp_nouns);
    let tokens = vec![
        det(0, "le", 1),
        noun(1, agent, Some(2), "suj"),
        tk(2, "porta", "porter", "VERB", None, "root"),
        det(3, "le", 4),
        noun(4, clothing, Some(2), "obj"),
        adp(5, "dans", 7),
        det(6, "la", 7),
        noun(7, tp, Some(2), "obl"),
        dot(8, 2),
    ];
    let frames = vec![inst(
        "porter",
        "Wearing",
        vec![2],
        vec![role("Wearer", 0, 1), role("Clothing", 3, 4)],
    )];
    sentence(doc, sid, tokens, frames)
}

/// "le <topic> porta sur le <object> ." — the be-about sense, no frame.
fn porter_other(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let topic = pick(rng, v.topics);
    let object = pick(rng, v.objects);
    let tokens = vec![
        det(0, "le", 1),
        noun(1, topic, Some(2), "suj"),
        tk(2, "porta", "porter", "VERB", None, "root"),
        adp(3, "sur", 5),
        det(4, "le", 5),
        noun(5, object, Some(2), "obl"),
        dot(6, 2),
    ];
    let frames = vec![inst("porter", OTHER_FRAME, vec![2], vec![])];
    sentence(doc, sid, tokens, frames)
}

/// "le <agent> décida l' <action> et porta le <theme> vers le <goal> ." —
/// two instances sharing the subject span.
fn combo(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let agent = pick(rng, v.agents);
    let action = pick(rng, v.actions);
    let theme = pick(rng, v.themes);
    let goal = pick(rng, v.goals);
    let tokens = vec![
        det(0, "le", 1),
        noun(1, agent, Some(2), "suj"),
        tk(2, "décida", "décider", "VERB", None, "root"),
        det(3, "l'", 4),
        noun(4, action, Some(2), "obj"),
        tk(5, "et", "et", "CCONJ", Some(6), "cc"),
        tk(6, "porta", "porter", "VERB", Some(2), "conj"),
        det(7, "le", 8),
        noun(8, theme, Some(6), "obj"),
        adp(9, "vers", 11),
        det(10, "le", 11),
        noun(11, goal, Some(6), "obl"),
        dot(12, 2),
    ];
    let frames = vec![
        inst(
            "décider",
            "Deciding",
            vec![2],
            vec![role("Cognizer", 0, 1), role("Decision", 3, 4)],
        ),
        inst(
            "porter",
            "Bringing",
            vec![6],
            vec![role("Agent", 0, 1), role("Theme", 7, 8), role("Goal", 9, 11)],
        ),
    ];
    sentence(doc, sid, tokens, frames)
}

/// "l' attaque de la <unit> surprit le <victim> ." — the target noun is
/// the subject; the victim is the higher verb's object.
fn attack_subject(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let unit = pick(rng, v.units);
    let victim = pick(rng, v.victims);
    let tokens = vec![
        det(0, "l'", 1),
        noun(1, "attaque", Some(5), "suj"),
        adp(2, "de", 4),
        det(3, "la", 4),
        noun(4, unit, Some(1), "mod"),
        tk(5, "surprit", "surprendre", "VERB", None, "root"),
        det(6, "le", 7),
        noun(7, victim, Some(5), "obj"),
        dot(8, 5),
    ];
    let frames = vec![inst(
        "attaque",
        "Attack",
        vec![1],
        vec![role("Assailant", 2, 4), role("Victim", 6, 7)],
    )];
    sentence(doc, sid, tokens, frames)
}

/// "l' attaque depuis la <place> frappa le <victim> en <year> ."
fn attack_source(rng: &mut ChaCha20Rng, v: &SourceVocab, doc: &str, sid: usize) -> Sentence {
    let place = pick(rng, v.places);
    let victim = pick(rng, v.victims);
    let year = pick(rng, &YEARS);
    let tokens = vec![
        det(0, "l'", 1),
        noun(1, "attaque", Some(5), "suj"),
        adp(2, "depuis", 4),
        det(3, "la", 4),
        noun(4, place, Some(1), "mod"),
        tk(5, "frappa", "frapper", "VERB", None, "root"),
        det(6, "le", 7),
        noun(7, victim, Some(5), "obj"),
        adp(8, "en", 9),
        num(9, year, Some(5), "obl"),
        dot(10, 5),
    ];
    let frames = vec![inst(
        "attaque",
        "Attack",
        vec![1],
        vec![role("Source", 2, 4), role("Victim", 6, 7), role("Time", 8, 9)],
    )];
    sentence(doc, sid, tokens, frames)
}

type TemplateFn = fn(&mut ChaCha20Rng, &SourceVocab, &str, usize) -> Sentence;

/// (cumulative weight out of 100, template).
const TEMPLATES: [(u32, TemplateFn); 14] = [
    (12, discovery_tp),
    (20, discovery_year),
    (23, discovery_other),
    (35, decide_tp),
    (47, decide_nested),
    (57, attack_headline),
    (63, attack_described),
    (65, attack_other),
    (75, bring),
    (83, wear),
    (84, porter_other),
    (92, combo),
    (96, attack_subject),
    (100, attack_source),
];

fn pick_template(rng: &mut ChaCha20Rng) -> TemplateFn {
    let roll = rng.gen_range(0..100u32);
    for (bound, f) in TEMPLATES {
        if roll < bound {
            return f;
        }
    }
    unreachable!("cumulative weights cover 0..100")
}

/// Generates a corpus of `n_sentences` sentences (≥ 10) over alternating
/// WGM/WA documents of 4-6 sentences each. Byte-identical for equal
/// `(n_sentences, seed)`.
pub fn generate(n_sentences: usize, seed: u64) -> Result<SynthData> {
    if n_sentences < 10 {
        return Err(Error::Config(format!(
            "synthetic corpus needs at least 10 sentences, got {n_sentences}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut documents = Vec::new();
    let mut emitted = 0;
    let mut doc_idx = 0;
    while emitted < n_sentences {
        let vocab = if doc_idx % 2 == 0 { &WGM } else { &WA };
        let doc_id = format!("{}_{:04}", vocab.name.to_ascii_lowercase(), doc_idx);
        let doc_len = rng.gen_range(4..=6).min(n_sentences - emitted);
        let sentences = (0..doc_len)
            .map(|sid| pick_template(&mut rng)(&mut rng, vocab, &doc_id, sid))
            .collect();
        documents.push(Document {
            doc_id,
            source: vocab.name.to_string(),
            sentences,
        });
        emitted += doc_len;
        doc_idx += 1;
    }
    let corpus = Corpus { documents };
    let lexicon = lexicon();
    corpus.validate_with_lexicon(&lexicon)?;
    Ok(SynthData {
        corpus,
        lexicon,
        questions_tsv: include_str!("../assets/default_questions.tsv"),
    })
}

/// File names produced by [`write_to_dir`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthPaths {
    pub corpus: std::path::PathBuf,
    pub lexicon: std::path::PathBuf,
    pub questions: std::path::PathBuf,
}

/// Generates and writes `corpus.jsonl`, `lexicon.json`, and
/// `questions.tsv` under `dir`.
pub fn write_to_dir(n_sentences: usize, seed: u64, dir: &std::path::Path) -> Result<SynthPaths> {
    let data = generate(n_sentences, seed)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = SynthPaths {
        corpus: dir.join("corpus.jsonl"),
        lexicon: dir.join("lexicon.json"),
        questions: dir.join("questions.tsv"),
    };
    data.corpus.write_to_path(&paths.corpus)?;
    data.lexicon.write_to_path(&paths.lexicon)?;
    std::fs::write(&paths.questions, data.questions_tsv)
        .map_err(|e| Error::io(&paths.questions, e))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::iter_lu_occurrences;
    use crate::eval::{evaluate_levels, Cascade, QuestionMap};
    use crate::features::target_head;
    use crate::tagging::{decode_labels, encode_labels, LabelSet};

    #[test]
    fn rejects_tiny_requests() {
        assert!(generate(9, 0).is_err());
        assert!(generate(10, 0).is_ok());
    }

    #[test]
    fn generated_corpus_validates_and_has_requested_size() {
        let data = generate(300, DEFAULT_SEED).unwrap();
        assert_eq!(data.corpus.sentence_count(), 300);
        data.corpus.validate_with_lexicon(&data.lexicon).unwrap();
        let sources: std::collections::BTreeSet<&str> =
            data.corpus.documents.iter().map(|d| d.source.as_str()).collect();
        assert_eq!(sources.into_iter().collect::<Vec<_>>(), vec!["WA", "WGM"]);
        for doc in &data.corpus.documents {
            assert!((1..=6).contains(&doc.sentences.len()));
        }
    }

    #[test]
    fn generation_is_deterministic_and_seed_sensitive() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let dir_c = tempfile::tempdir().unwrap();
        write_to_dir(120, 7, dir_a.path()).unwrap();
        write_to_dir(120, 7, dir_b.path()).unwrap();
        write_to_dir(120, 8, dir_c.path()).unwrap();
        for name in ["corpus.jsonl", "lexicon.json", "questions.tsv"] {
            let a = std::fs::read(dir_a.path().join(name)).unwrap();
            let b = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs across identical runs");
        }
        let a = std::fs::read(dir_a.path().join("corpus.jsonl")).unwrap();
        let c = std::fs::read(dir_c.path().join("corpus.jsonl")).unwrap();
        assert_ne!(a, c, "different seeds should give different corpora");
    }

    #[test]
    fn written_files_parse_back() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_to_dir(80, 3, dir.path()).unwrap();
        let corpus = Corpus::parse_corpus(&paths.corpus).unwrap();
        let lexicon = FrameLexicon::parse_lexicon(&paths.lexicon).unwrap();
        corpus.validate_with_lexicon(&lexicon).unwrap();
        let qmap = QuestionMap::from_path(&paths.questions).unwrap();
        assert!(!qmap.is_empty());
        assert_eq!(corpus.sentence_count(), 80);
    }

    #[test]
    fn every_lu_occurrence_is_annotated() {
        let data = generate(400, 11).unwrap();
        for s in data.corpus.sentences() {
            let gold: std::collections::BTreeSet<(String, Vec<usize>)> = s
                .frames
                .iter()
                .map(|f| (f.lu.clone(), f.target_tokens.clone()))
                .collect();
            let occs: std::collections::BTreeSet<(String, Vec<usize>)> =
                iter_lu_occurrences(s, &data.lexicon)
                    .into_iter()
                    .map(|o| (o.lu, o.target_tokens))
                    .collect();
            assert_eq!(gold, occs, "({}, {})", s.doc_id, s.sent_id);
        }
    }

    #[test]
    fn gold_self_evaluation_is_perfect() {
        let data = generate(200, 5).unwrap();
        let report =
            evaluate_levels(&data.corpus, &data.corpus, &data.lexicon, Cascade::Strict).unwrap();
        let l = report.levels;
        for prf in [l.dc, l.sc, l.dr, l.sr] {
            assert_eq!((prf.precision, prf.recall, prf.fmeasure), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn annotations_round_trip_through_the_tagging_scheme() {
        let data = generate(250, 13).unwrap();
        let mut checked = 0;
        for s in data.corpus.sentences() {
            for f in &s.frames {
                let label_set = LabelSet::for_lu(&data.lexicon, &f.lu).unwrap();
                let encoded = encode_labels(s.len(), f, &label_set).unwrap();
                let decoded = decode_labels(&encoded, &f.target_tokens, &label_set);
                assert_eq!(&decoded.instance, f);
                assert_eq!(decoded.repaired_orphans, 0);
                checked += 1;
            }
        }
        assert!(checked > 250, "expected more than one instance per sentence");
    }

    #[test]
    fn both_attachment_flavors_and_all_target_shapes_occur() {
        let data = generate(600, DEFAULT_SEED).unwrap();
        let mut nested = 0;
        let mut wide = 0;
        let mut shapes = std::collections::BTreeSet::new();
        for s in data.corpus.sentences() {
            for f in &s.frames {
                let head = target_head(s, &f.target_tokens);
                let tok = &s.tokens[head];
                shapes.insert((tok.pos.clone(), tok.head.is_none()));
            }
            let deciders: Vec<&FrameInstance> =
                s.frames.iter().filter(|f| f.frame == "Deciding").collect();
            if deciders.len() == 2 {
                let inner = deciders.iter().find(|f| f.target_tokens == vec![6]).unwrap();
                if inner.roles.iter().any(|r| r.fe == "Time") {
                    nested += 1;
                } else {
                    wide += 1;
                }
            }
        }
        assert!(nested >= 10, "nested attachments: {nested}");
        assert!(wide >= 10, "wide attachments: {wide}");
        assert!(wide > nested, "wide should be the majority pattern");
        // Verb/noun targets both as root and not.
        for shape in [
            ("VERB".to_string(), true),
            ("VERB".to_string(), false),
            ("NOUN".to_string(), true),
            ("NOUN".to_string(), false),
        ] {
            assert!(shapes.contains(&shape), "missing target shape {shape:?}");
        }
    }

    #[test]
    fn tp_phrases_are_temporal_in_wgm_and_locative_in_wa() {
        let data = generate(500, 21).unwrap();
        let mut wgm_time = 0;
        let mut wa_place = 0;
        for doc in &data.corpus.documents {
            for s in &doc.sentences {
                let has_dans = s.tokens.iter().any(|t| t.lemma == "dans");
                if !has_dans {
                    continue;
                }
                for f in &s.frames {
                    for r in &f.roles {
                        if s.tokens[r.start].lemma == "dans" {
                            match doc.source.as_str() {
                                "WGM" => {
                                    assert_eq!(r.fe, "Time", "({}, {})", s.doc_id, s.sent_id);
                                    wgm_time += 1;
                                }
                                "WA" => {
                                    assert_eq!(r.fe, "Place", "({}, {})", s.doc_id, s.sent_id);
                                    wa_place += 1;
                                }
                                other => panic!("unexpected source {other}"),
                            }
                        }
                    }
                }
            }
        }
        assert!(wgm_time >= 10, "temporal dans-phrases: {wgm_time}");
        assert!(wa_place >= 10, "locative dans-phrases: {wa_place}");
    }

    #[test]
    fn question_map_covers_every_annotated_role() {
        let data = generate(300, 2).unwrap();
        let qmap = QuestionMap::parse_tsv(data.questions_tsv).unwrap();
        for s in data.corpus.sentences() {
            for f in &s.frames {
                for r in &f.roles {
                    assert_ne!(
                        qmap.question(&f.frame, &r.fe),
                        crate::eval::OTHER_QUESTION,
                        "unmapped ({}, {})",
                        f.frame,
                        r.fe
                    );
                }
            }
        }
    }
}
