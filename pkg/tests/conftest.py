import numpy as np
import pytest
from hypothesis import settings

from dsextract.corpus import EntitySpan, RelationInstance, RelationLabel, Sentence, spans_to_tags
from dsextract.synthetic import SyntheticConfig, generate_synthetic
from dsextract.tensor import Rng

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture(scope="session")
def small_corpus():
    cfg = SyntheticConfig(n_ner_sentences=300, n_re_sentences=200, n_discovery_sentences=150, discovery_triples=12)
    return generate_synthetic(cfg, Rng(11))


@pytest.fixture
def toy_ner():
    s1 = Sentence("a", ["patient", "takes", "turmeric", "for", "joint", "pain", "."])
    s2 = Sentence("b", ["black", "cohosh", "helped", "flashes"])
    return [
        (s1, spans_to_tags([EntitySpan("DS", 2, 3), EntitySpan("Event", 4, 6)], len(s1))),
        (s2, spans_to_tags([EntitySpan("DS", 0, 2), EntitySpan("Event", 3, 4)], len(s2))),
    ]


@pytest.fixture
def toy_instance():
    s = Sentence("s1", ["peppermint", "relieved", "her", "nausea"])
    return RelationInstance("s1#0", s, EntitySpan("DS", 0, 1), EntitySpan("Event", 3, 4), RelationLabel.POSITIVE)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
