import io

import pytest

from xfer.corpus import (
    ACCEPTABLE, UNACCEPTABLE, UNJUDGED, DuplicateUtteranceId, annotate_interactive, dump_corpus,
    load_corpus, parse_corpus, save_corpus,
)
from xfer.qlf import QlfSyntaxError

SAMPLE = """utt u1
source elliptical_np(term(bare_plur,C^[and,[flight1,C]]))
cand + elliptical_np(term(def_plur,C_1^[and,[vol1,C_1]]))
used bp_def_plur flight
cand - elliptical_np(term(bare_plur,C_1^[and,[vol1,C_1]]))
used bp_bare_plur flight

utt u2
source [stop1,S]
cand ? [escale1,S_1]

utt u3
source [monday1,E]
cand - [lundi1,E_1]
used monday monday
cand + [lundi2,E_1]
"""


def test_round_trip_bytes(tmp_path):
    corpus = parse_corpus(SAMPLE)
    assert dump_corpus(corpus) == SAMPLE
    path = tmp_path / "c.corpus"
    save_corpus(corpus, path)
    assert path.read_text() == SAMPLE
    again = load_corpus(path)
    assert again == corpus


def test_marks_and_rule_bags():
    corpus = parse_corpus(SAMPLE)
    u1, u2, u3 = corpus
    assert [c.annotation for c in u1.candidates] == [ACCEPTABLE, UNACCEPTABLE]
    assert u2.candidates[0].annotation == UNJUDGED
    assert u3.candidates[0].rules["monday"] == 2
    assert u1.has_acceptable() and not u2.has_acceptable()


def test_duplicate_ids():
    with pytest.raises(DuplicateUtteranceId):
        parse_corpus("utt a\nsource x\nutt a\nsource y\n")


def test_syntax_errors_carry_line():
    with pytest.raises(QlfSyntaxError) as e:
        parse_corpus("utt a\nsource x\ncand * y\n")
    assert e.value.line == 3
    with pytest.raises(QlfSyntaxError) as e:
        parse_corpus("utt a\nsource f(x\n")
    assert e.value.line == 2
    with pytest.raises(QlfSyntaxError):
        parse_corpus("utt a\n")
    with pytest.raises(QlfSyntaxError):
        parse_corpus("cand + x\n")


def test_empty_corpus():
    assert len(parse_corpus("% nothing\n")) == 0
    assert dump_corpus(parse_corpus("")) == ""


def _run(corpus, keys):
    saves = []
    out = io.StringIO()
    annotate_interactive(corpus, io.StringIO(keys), out, save=lambda c: saves.append(dump_corpus(c)))
    return out.getvalue(), saves


def test_annotate_nothing_pending():
    corpus = parse_corpus(SAMPLE.replace("cand ?", "cand +"))
    out, _ = _run(corpus, "")
    assert "acceptable?" not in out


def test_annotate_script():
    text = ("utt a\nsource x\ncand ? y1\ncand ? y2\ncand ? y3\n\n"
            "utt b\nsource z\ncand ? w1\n")
    corpus = parse_corpus(text)
    out, saves = _run(corpus, "y n q\n")
    marks = [c.annotation for u in corpus for c in u.candidates]
    assert marks == ["+", "-", "?", "?"]
    assert out.count("acceptable?") == 3
    assert "cand ? y3" in saves[-1]


def test_annotate_skip_and_resume():
    corpus = parse_corpus("utt a\nsource x\ncand ? y1\ncand ? y2\ncand ? y3\n")
    _run(corpus, "s y\n")  # input runs out: treated as quit
    assert [c.annotation for c in corpus.utterances[0].candidates] == ["?", "+", "?"]
    out, _ = _run(corpus, "n n\n")
    assert [c.annotation for c in corpus.utterances[0].candidates] == ["-", "+", "-"]
    assert out.count("acceptable?") == 2


def test_annotate_unknown_key_reprompts():
    corpus = parse_corpus("utt a\nsource x\ncand ? y1\n")
    out, _ = _run(corpus, "maybe y\n")
    assert "unknown key" in out
    assert corpus.utterances[0].candidates[0].annotation == "+"
