"""Template-based synthetic corpora standing in for annotated clinical notes.

Every sentence is assembled from clause templates whose relation class is
known, so BIO tags, relation labels and planted signal frequencies are exact.
Supplement mentions are drawn from a variant lexicon (abbreviations, brand
names, misspellings) and events from a Zipf-weighted symptom list, so rare
events and spelling variants show up unseen at test time.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .corpus import (
    EntitySpan,
    Lexicon,
    RelationInstance,
    RelationLabel,
    Sentence,
    spans_to_tags,
)
from .tensor import Rng

SUPPLEMENTS: dict = {
    "black cohosh": ["black cohosh", "black cohash", "cohosh", "remifemin"],
    "chamomile": ["chamomile", "chamomille", "camomile"],
    "cranberry": ["cranberry", "cran", "cranberries", "cranberry pills"],
    "folic acid": ["folic acid", "folate", "folic", "folacin"],
    "garlic": ["garlic", "garlique", "garlic pills"],
    "turmeric": ["turmeric", "tumeric", "curcumin", "turmeric root"],
    "valerian": ["valerian", "valerian root", "valarian"],
    "dandelion": ["dandelion", "dandelion root"],
    "ginger": ["ginger", "ginger root", "gingerroot"],
    "ginkgo": ["ginkgo", "ginko", "ginkgo biloba", "gingko"],
    "ginseng": ["ginseng", "panax ginseng", "ginsing"],
    "glucosamine": ["glucosamine", "glucosamine chondroitin", "glucosomine"],
    "green tea": ["green tea", "green tea extract", "egcg"],
    "lavender": ["lavender", "lavender oil", "lavendar"],
    "melatonin": ["melatonin", "melatonine", "melantonin"],
    "milk thistle": ["milk thistle", "silymarin", "milkthistle"],
    "saw palmetto": ["saw palmetto", "saw palmeto", "palmetto"],
    "fish oil": ["fish oil", "omega-3", "fish oil capsules"],
    "niacin": ["niacin", "niaspan", "nicotinic acid"],
    "peppermint": ["peppermint", "peppermint oil", "pepermint"],
    "vitamin c": ["vitamin c", "ascorbic acid", "vit c"],
    "zinc": ["zinc", "zinc sulfate", "zinc gluconate"],
    "psyllium": ["psyllium", "metamucil", "psyllium husk"],
    "biotin": ["biotin", "biotine"],
    "vitamin e": ["vitamin e", "vit e", "tocopherol"],
}

EVENTS: tuple = (
    "nausea", "rash", "hot flashes", "insomnia", "anxiety", "headache", "pain", "constipation",
    "diarrhea", "hives", "itching", "flushing", "bleeding", "wound", "hyperlipidemia", "hypertension",
    "anemia", "hair loss", "uti", "joint pain", "fatigue", "dizziness", "heartburn", "bloating",
    "vomiting", "depression", "stress", "cough", "cold symptoms", "night sweats", "palpitations",
    "liver damage", "elevated liver enzymes", "abdominal pain", "indigestion", "cramps", "acne",
    "eczema", "memory loss", "tinnitus", "arthritis", "inflammation", "back pain", "migraine",
    "muscle cramps", "dry mouth", "weight gain", "bruising", "nosebleeds", "upset stomach",
    "gas", "reflux", "sleep problems", "restless legs", "mood swings", "irritability", "hair thinning",
    "brittle nails", "scar", "dry skin", "sore throat", "congestion", "urinary frequency",
    "enlarged prostate", "high cholesterol", "low energy", "poor appetite", "neuropathy",
    "numbness", "tingling", "shortness of breath", "chest tightness", "wheezing", "swelling",
    "edema", "tremor", "jaw pain", "neck pain", "knee pain", "hip pain", "stiffness",
    "osteoarthritis", "gout", "kidney stones", "dysuria", "menstrual cramps", "vaginal dryness",
    "hot flushes", "chills", "fever", "sinusitis", "allergies", "dermatitis", "psoriasis",
    "rosacea", "cold sores", "mouth ulcers", "gingivitis", "halitosis", "tachycardia",
    "bradycardia", "hypotension", "syncope", "vertigo", "light headedness", "blurred vision",
    "dry eyes", "eye strain", "jitteriness", "nervousness", "agitation", "confusion",
    "nightmares", "vivid dreams", "drowsiness", "somnolence", "lethargy", "malaise",
    "myalgia", "arthralgia", "hepatotoxicity", "jaundice", "pruritus", "urticaria", "erythema",
    "hyperglycemia", "hypoglycemia", "thrombocytopenia", "hematuria", "melena", "dyspepsia",
    "flatulence", "anorexia", "cachexia", "alopecia", "onychomycosis", "folliculitis",
    "cellulitis", "paresthesia", "dysgeusia", "xerostomia", "epistaxis", "ecchymosis",
    "hyperkalemia", "hyponatremia", "gastritis", "colitis", "esophagitis", "cystitis",
    "prostatitis", "bursitis", "tendinitis", "plantar fasciitis", "sciatica", "fibromyalgia",
)

LOCATIONS = (
    "knee", "back", "lower back", "neck", "shoulder", "hip", "ankle", "wrist", "elbow", "foot",
    "hand", "leg", "arm", "chest", "stomach", "pelvic", "eye", "ear", "jaw", "muscle",
    "bladder", "sinus", "throat", "scalp", "skin", "gum", "tooth", "heel", "calf", "finger",
)
SYMPTOM_HEADS = (
    "pain", "swelling", "stiffness", "numbness", "cramps", "soreness", "tenderness", "weakness",
    "spasms", "irritation", "discomfort", "tingling",
)
# rarer composite events ("knee stiffness") form the long tail after the named symptoms
COMPOSITE_EVENTS: tuple = tuple(
    f"{loc} {head}" for head in SYMPTOM_HEADS for loc in LOCATIONS if f"{loc} {head}" not in EVENTS
)
MODIFIERS = ("mild", "severe", "chronic", "intermittent", "worsening", "occasional", "new", "persistent")

# symptom words used as modifiers of a non-event noun; tagged O
DISTRACTORS = (
    "pain clinic", "pain medication", "pain management", "sleep study", "sleep aid", "cough syrup",
    "cold compress", "anxiety medication", "headache diary", "rash cream", "stress test",
    "allergy list", "acne wash", "migraine clinic", "arthritis clinic", "depression screening",
    "nausea medication", "insomnia clinic", "constipation regimen", "fatigue questionnaire",
    "cramps medication", "reflux diet", "gout diet", "eczema cream", "heartburn tablets",
)

SUBJECTS = ("patient", "she", "he", "pt", "the patient", "her husband", "his wife", "mother")
DOSES = ("500 mg", "1000 mg", "2 capsules", "1 tablet", "400 mcg", "10 ml", "250 mg", "3 g")
FREQS = ("daily", "twice daily", "at bedtime", "as needed", "every morning", "bid", "tid", "weekly")
TIMES = ("last week", "two months ago", "yesterday", "in may", "recently", "3 weeks ago", "last year")


@dataclass(frozen=True)
class ClauseTemplate:
    text: str
    cue: str
    label: RelationLabel

    @property
    def cue_pattern(self) -> re.Pattern:
        return re.compile(r"(^|\s)" + re.escape(self.cue) + r"(\s|$)", re.IGNORECASE)


P, N, R = RelationLabel.POSITIVE, RelationLabel.NEGATIVE, RelationLabel.NOT_RELATED

CLAUSES: tuple = (
    ClauseTemplate("{pt} takes {ds} {dose} {freq} for {ev}", "for", P),
    ClauseTemplate("{pt} uses {ds} to help with {ev}", "to help with", P),
    ClauseTemplate("{ev} improved after starting {ds}", "improved after starting", P),
    ClauseTemplate("{pt} reports {ds} helps with {ev}", "helps with", P),
    ClauseTemplate("recommend {ds} {dose} {freq} for {ev}", "for", P),
    ClauseTemplate("{ds} has been effective for {ev}", "effective for", P),
    ClauseTemplate("started {ds} {time} for treatment of {ev}", "for treatment of", P),
    ClauseTemplate("{pt} finds that {ds} relieves {ev}", "relieves", P),
    ClauseTemplate("{ev} is well controlled with {ds}", "well controlled with", P),
    ClauseTemplate("{pt} is taking {ds} to prevent {ev}", "to prevent", P),
    ClauseTemplate("{ds} caused {ev}", "caused", N),
    ClauseTemplate("{pt} developed {ev} after taking {ds}", "after taking", N),
    ClauseTemplate("{ev} likely due to {ds}", "due to", N),
    ClauseTemplate("stopped {ds} {time} because of {ev}", "because of", N),
    ClauseTemplate("{pt} reports {ev} since starting {ds}", "since starting", N),
    ClauseTemplate("allergic to {ds} , reaction : {ev}", "allergic to", N),
    ClauseTemplate("{ds} may be causing her {ev}", "may be causing", N),
    ClauseTemplate("{ev} is a known side effect of {ds}", "side effect of", N),
    ClauseTemplate("{ds} did not cause {ev}", "did not cause", R),
    ClauseTemplate("{pt} denies {ev} while on {ds}", "denies", R),
    ClauseTemplate("no {ev} since starting {ds}", "no", R),
    ClauseTemplate("{pt} takes {ds} {freq} , {ev} is unchanged", "unchanged", R),
    ClauseTemplate("{ds} is not helping with {ev}", "not helping", R),
    ClauseTemplate("{ev} is unrelated to {ds}", "unrelated to", R),
    ClauseTemplate("history of {ev} , currently on {ds} {dose} {freq}", "history of", R),
)

DS_ONLY: tuple = (
    "{pt} takes {ds} {dose} {freq}",
    "medications include {ds} , {ds} and {ds}",
    "continue {ds} {dose} {freq}",
    "{pt} was advised to stop {ds} before surgery",
    "{ds} {dose} po {freq}",
    "discussed risks and benefits of {ds}",
    "{pt} asked about {ds} and {ds}",
    "{ds} was added to her regimen {time}",
    "current supplements : {ds} , {ds}",
    "{pt} stopped taking {ds} {time}",
    "{pt} takes {ds} and uses {distractor} {freq}",
    "{pt} was referred to {distractor} , continues {ds}",
    "{ds} and {distractor} were reviewed",
    "{pt} stopped {ds} and started {distractor} {time}",
    "{pt} takes {ds} {dose} {freq} before {distractor}",
    "history of {distractor} , currently on {ds} {dose} {freq}",
    "no {distractor} since starting {ds}",
    "{pt} scheduled {distractor} after taking {ds}",
)

# body-site words also modify non-event nouns ("knee brace"), so a site word alone
# does not decide whether an event starts
SITE_OBJECTS = ("brace", "x-ray", "exam", "surgery", "injection", "support", "wrap", "mri", "cream", "ultrasound")

# optional O-only tails appended to relation sentences
TAILS = (", referred to {distractor}", "; continue {distractor}", ", will add {distractor}")

CONNECTORS = (";", ", and", ", but", ". also")


@dataclass
class SyntheticConfig:
    supplements: dict = field(default_factory=lambda: {k: list(v) for k, v in SUPPLEMENTS.items()})
    events: list = field(default_factory=lambda: list(EVENTS + COMPOSITE_EVENTS))
    class_mix: tuple = (0.67, 0.21, 0.12)
    n_ner_sentences: int = 7000
    n_re_sentences: int = 3000
    n_discovery_sentences: int = 2000
    ner_pair_fraction: float = 0.40
    two_event_rate: float = 0.24
    compound_rate: float = 0.04
    canonical_variant_rate: float = 0.6
    capitalize_rate: float = 0.5
    event_zipf: float = 1.0
    event_typo_rate: float = 0.08
    modifier_rate: float = 0.15
    tail_rate: float = 0.3
    site_distractor_rate: float = 0.6
    discovery_triples: int = 60
    discovery_zipf: float = 1.1
    discovery_no_pair_rate: float = 0.1
    kb_known_rate: float = 0.7

    def validate(self) -> None:
        if not self.supplements or not self.events:
            raise ValueError("supplement and event lexicons must be non-empty")
        if any(not v for v in self.supplements.values()):
            raise ValueError("every supplement needs at least one surface form")
        if len(self.class_mix) != 3 or any(p < 0 for p in self.class_mix):
            raise ValueError("class_mix needs three non-negative proportions")
        if abs(sum(self.class_mix) - 1.0) > 1e-6:
            raise ValueError(f"class_mix must sum to 1, got {sum(self.class_mix)}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown synthetic config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.class_mix = tuple(cfg.class_mix)
        return cfg


@dataclass(frozen=True)
class GoldSignal:
    ds: str
    event: str
    relation: RelationLabel
    frequency: int


@dataclass
class SyntheticCorpus:
    ner: list
    relations: list
    discovery: list
    gold: list
    lexicon: Lexicon
    kb: set


def build_lexicon(supplements: dict) -> Lexicon:
    lex = Lexicon()
    for canon, variants in supplements.items():
        lex.add(canon, canon)
        for v in variants:
            lex.add(v, canon)
    return lex


class _Renderer:
    def __init__(self, cfg: SyntheticConfig, rng: Rng, noisy_events: bool = False):
        self.cfg = cfg
        self.rng = rng
        self.noisy_events = noisy_events
        self.canon = sorted(cfg.supplements)
        ranks = np.arange(1, len(cfg.events) + 1, dtype=np.float64)
        w = ranks ** -cfg.event_zipf
        self.event_p = w / w.sum()

    def pick(self, seq):
        return seq[int(self.rng.integers(len(seq)))]

    def ds_surface(self, canon: str) -> str:
        variants = self.cfg.supplements[canon]
        if len(variants) == 1 or self.rng.random() < self.cfg.canonical_variant_rate:
            surface = variants[0]
        else:
            surface = variants[1 + int(self.rng.integers(len(variants) - 1))]
        r = self.rng.random()
        if r < 0.1:
            surface = surface.title()
        elif r < 0.12:
            surface = surface.upper()
        return surface

    def event(self, exclude=()) -> str:
        while True:
            ev = self.cfg.events[int(self.rng.choice(len(self.cfg.events), p=self.event_p))]
            if ev not in exclude:
                return ev

    def render(self, template: str, ds: list, events: list, tokens: list, spans: list, clause: int, roles: list):
        """Append a template's tokens; ``roles`` collects (span, clause) for relation pairing."""
        ds_iter = iter(ds)
        for piece in template.split(" "):
            if piece == "{ds}":
                canon = next(ds_iter)
                self._entity(self.ds_surface(canon), "DS", tokens, spans, roles, clause, canon)
            elif piece == "{ev}":
                for k, ev in enumerate(events):
                    if k:
                        tokens.append("and")
                    if self.rng.random() < self.cfg.modifier_rate:
                        tokens.append(self.pick(MODIFIERS))
                    self._entity(self.event_surface(ev), "Event", tokens, spans, roles, clause, ev)
            elif piece == "{pt}":
                tokens.extend(self.pick(SUBJECTS).split())
            elif piece == "{dose}":
                tokens.extend(self.pick(DOSES).split())
            elif piece == "{freq}":
                tokens.extend(self.pick(FREQS).split())
            elif piece == "{distractor}":
                if self.rng.random() < self.cfg.site_distractor_rate:
                    tokens.extend([self.pick(LOCATIONS).split()[-1], self.pick(SITE_OBJECTS)])
                else:
                    tokens.extend(self.pick(DISTRACTORS).split())
            elif piece == "{time}":
                tokens.extend(self.pick(TIMES).split())
            else:
                tokens.append(piece)

    def event_surface(self, ev: str) -> str:
        """The event as written; in noisy mode one long token may carry a typo."""
        if not self.noisy_events or self.rng.random() >= self.cfg.event_typo_rate:
            return ev
        words = ev.split()
        long = [i for i, w in enumerate(words) if len(w) >= 4 and w.isalpha()]
        if not long:
            return ev
        i = long[int(self.rng.integers(len(long)))]
        words[i] = typo(words[i], self.rng)
        return " ".join(words)

    @staticmethod
    def _entity(surface, label, tokens, spans, roles, clause, canon):
        start = len(tokens)
        tokens.extend(surface.split())
        span = EntitySpan(label, start, len(tokens))
        spans.append(span)
        roles.append((span, clause, canon))

    def finish(self, tokens: list) -> list:
        if tokens[-1] not in (".", ";"):
            tokens.append(".")
        if self.rng.random() < self.cfg.capitalize_rate and tokens[0][:1].isalpha():
            tokens[0] = tokens[0][:1].upper() + tokens[0][1:]
        return tokens


def typo(word: str, rng: Rng) -> str:
    """Swap, drop or double one character after the first; words under 3 letters are kept."""
    if len(word) < 3:
        return word
    k = 1 + int(rng.integers(len(word) - 2))
    op = int(rng.integers(3))
    if op == 0:
        return word[:k] + word[k + 1] + word[k] + word[k + 2:]
    if op == 1:
        return word[:k] + word[k + 1:]
    return word[:k] + word[k] + word[k:]


def _clause_plan(cfg: SyntheticConfig, n: int, rng: Rng) -> list:
    """Per sentence: list of (n_events, label) clauses; labels allocated to hit ``class_mix``."""
    layouts = []
    for _ in range(n):
        r = rng.random()
        if r < cfg.compound_rate:
            layouts.append([1, 1])
        elif r < cfg.compound_rate + cfg.two_event_rate:
            layouts.append([2])
        else:
            layouts.append([1])
    total = sum(sum(lay) + (2 if len(lay) == 2 else 0) for lay in layouts)
    cross = sum(2 for lay in layouts if len(lay) == 2)
    remaining = np.array(cfg.class_mix, dtype=np.float64) * total
    remaining[2] -= cross
    order = rng.permutation(sum(len(lay) for lay in layouts))
    weights = [k for lay in layouts for k in lay]
    labels: list = [None] * len(weights)
    for j in order:
        deficit = np.clip(remaining, 0.0, None)
        if deficit.sum() <= 0:
            deficit = np.array(cfg.class_mix, dtype=np.float64)
        c = int(rng.choice(3, p=deficit / deficit.sum()))
        labels[j] = c
        remaining[c] -= weights[j]
    plan, k = [], 0
    for lay in layouts:
        plan.append([(n_ev, RELATION_ORDER[labels[k + i]]) for i, n_ev in enumerate(lay)])
        k += len(lay)
    return plan


RELATION_ORDER = (P, N, R)


def _render_pair_sentence(r: _Renderer, sid: str, clauses: list, templates_by_label: dict):
    """Render one or two relation clauses into a sentence; returns tokens, spans, labeled pairs."""
    tokens: list = []
    spans: list = []
    roles: list = []
    clause_labels = []
    used_ds: list = []
    used_ev: list = []
    for ci, (n_ev, label) in enumerate(clauses):
        if ci:
            tokens.extend(r.pick(CONNECTORS).split())
        tpl = r.pick(templates_by_label[label])
        ds = r.pick([c for c in r.canon if c not in used_ds])
        evs = []
        for _ in range(n_ev):
            evs.append(r.event(exclude=used_ev + evs))
        used_ds.append(ds)
        used_ev.extend(evs)
        r.render(tpl.text, [ds], evs, tokens, spans, ci, roles)
        clause_labels.append(label)
    if r.rng.random() < r.cfg.tail_rate:
        r.render(r.pick(TAILS), [], [], tokens, spans, 0, [])
    r.finish(tokens)
    sent = Sentence(sid, tokens)
    ds_roles = [x for x in roles if x[0].label == "DS"]
    ev_roles = [x for x in roles if x[0].label == "Event"]
    pairs = []
    for d_span, d_clause, d_canon in ds_roles:
        for e_span, e_clause, e_canon in ev_roles:
            lab = clause_labels[d_clause] if d_clause == e_clause else R
            pairs.append((d_span, e_span, lab, d_canon, e_canon))
    return sent, spans, pairs


def _render_ds_only(r: _Renderer, sid: str):
    tpl = r.pick(DS_ONLY)
    n_ds = tpl.count("{ds}")
    ds = [r.canon[i] for i in r.rng.choice(len(r.canon), size=n_ds, replace=False)]
    tokens: list = []
    spans: list = []
    r.render(tpl, ds, [], tokens, spans, 0, [])
    r.finish(tokens)
    return Sentence(sid, tokens), spans, ds


def _by_label() -> dict:
    out: dict = {P: [], N: [], R: []}
    for t in CLAUSES:
        out[t.label].append(t)
    return out


def generate_synthetic(cfg: Optional[SyntheticConfig] = None, rng: Optional[Rng] = None) -> SyntheticCorpus:
    """Generate the NER corpus, relation corpus, discovery sentences, gold signals and KB."""
    cfg = cfg or SyntheticConfig()
    cfg.validate()
    rng = rng or Rng(0)
    templates = _by_label()

    # NER: sentences mentioning supplements, a fraction also mentioning events
    r = _Renderer(cfg, rng.child("ner"), noisy_events=True)
    ner = []
    n_pair = int(round(cfg.ner_pair_fraction * cfg.n_ner_sentences))
    kinds = np.zeros(cfg.n_ner_sentences, dtype=bool)
    kinds[:n_pair] = True
    kinds = kinds[r.rng.permutation(cfg.n_ner_sentences)]
    ner_plan = iter(_clause_plan(cfg, n_pair, r.rng.child("plan")))
    for i in range(cfg.n_ner_sentences):
        sid = f"n{i}"
        if kinds[i]:
            sent, spans, _ = _render_pair_sentence(r, sid, next(ner_plan), templates)
        else:
            sent, spans, _ = _render_ds_only(r, sid)
        ner.append((sent, spans_to_tags(spans, len(sent))))

    # RE: every sentence carries at least one DS-Event pair
    r = _Renderer(cfg, rng.child("re"))
    relations = []
    for i, clauses in enumerate(_clause_plan(cfg, cfg.n_re_sentences, r.rng.child("plan"))):
        sent, _, pairs = _render_pair_sentence(r, f"r{i}", clauses, templates)
        for k, (d, e, lab, _, _) in enumerate(pairs):
            relations.append(RelationInstance(f"r{i}#{k}", sent, d, e, lab))

    # discovery: single-pair sentences with planted (ds, event, relation) frequencies
    r = _Renderer(cfg, rng.child("discovery"))
    triples = []
    seen = set()
    ranks = np.arange(1, cfg.discovery_triples + 1, dtype=np.float64) ** -cfg.discovery_zipf
    n_pair_sentences = cfg.n_discovery_sentences * (1.0 - cfg.discovery_no_pair_rate)
    freqs = np.maximum(1, np.round(n_pair_sentences * ranks / ranks.sum())).astype(int)
    while len(triples) < cfg.discovery_triples:
        ds = r.pick(r.canon)
        ev = r.pick(cfg.events[:60])
        lab = RELATION_ORDER[int(r.rng.choice(3, p=np.array(cfg.class_mix)))]
        if (ds, ev) in seen:
            continue
        seen.add((ds, ev))
        triples.append((ds, ev, lab, int(freqs[len(triples)])))
    slots = [t for t in triples for _ in range(t[3])]
    n_no_pair = max(0, cfg.n_discovery_sentences - len(slots))
    order = r.rng.permutation(len(slots) + n_no_pair)
    discovery = []
    counts: Counter = Counter()
    for i, j in enumerate(order):
        sid = f"d{i}"
        if j >= len(slots):
            sent, _, _ = _render_ds_only(r, sid)
        else:
            ds, ev, lab, _ = slots[j]
            tokens: list = []
            spans: list = []
            tpl = r.pick(templates[lab])
            r.render(tpl.text, [ds], [ev], tokens, spans, 0, [])
            sent = Sentence(sid, r.finish(tokens))
            counts[(ds, ev, lab)] += 1
        discovery.append(sent)
    gold = sorted(
        (GoldSignal(ds, ev, lab, counts[(ds, ev, lab)]) for ds, ev, lab, _ in triples),
        key=lambda g: (RELATION_ORDER.index(g.relation), -g.frequency, g.ds, g.event),
    )

    # KB: most planted positive/negative signals plus unplanted decoys
    kr = rng.child("kb")
    kb = set()
    for g in gold:
        if g.relation != R and kr.random() < cfg.kb_known_rate:
            kb.add((g.ds, g.event, g.relation.value))
    decoys = 0
    while decoys < 20:
        ds = sorted(cfg.supplements)[int(kr.integers(len(cfg.supplements)))]
        ev = cfg.events[int(kr.integers(len(cfg.events)))]
        lab = ("positive", "negative")[int(kr.integers(2))]
        if (ds, ev, lab) not in kb:
            kb.add((ds, ev, lab))
            decoys += 1

    return SyntheticCorpus(
        ner=ner, relations=relations, discovery=discovery, gold=gold,
        lexicon=build_lexicon(cfg.supplements), kb=kb,
    )


def positive_cue_patterns() -> list:
    return [t.cue_pattern for t in CLAUSES if t.label == P]


def write_gold(path, gold: list) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for g in gold:
            fh.write(f"{g.ds}\t{g.event}\t{g.relation.value}\t{g.frequency}\n")


def read_gold(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                ds, ev, rel, freq = line.rstrip("\n").split("\t")
                out.append(GoldSignal(ds, ev, RelationLabel.parse(rel), int(freq)))
    return out
