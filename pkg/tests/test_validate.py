"""Exact-vs-bound soundness comparisons on enumerable instances."""

import numpy as np

from nbperc import complete, corpus, exact_observables
from nbperc.validate import UNCHECKED_IDS, SoundnessReport, soundness_report


def test_k4_checks_are_sound_and_nontrivial():
    rep = soundness_report(complete(4), 0.25, label="k4")
    assert isinstance(rep, SoundnessReport)
    assert rep.n == 4 and rep.m == 12
    assert len(rep.checks) > 10
    assert not rep.violations
    by_id = {}
    for c in rep.checks:
        by_id.setdefault(c.bound_id, []).append(c)
    # the uniform adjacency bound compares against the worst-case exact chi
    ex = exact_observables(complete(4), 0.25, probes=range(4), modes=("out",))
    chk = by_id["chi-out-adjacency-uniform"][0]
    assert chk.exact == max(ex.chi["out"])
    assert chk.bound == 4.0
    assert chk.ok


def test_unchecked_ids_are_skipped_not_compared():
    rep = soundness_report(complete(4), 0.25, label="k4")
    checked = {c.bound_id for c in rep.checks}
    skipped = {bound_id for bound_id, _ in rep.skipped}
    for bound_id in UNCHECKED_IDS:
        assert bound_id not in checked
    assert {"threshold-in-norm1", "threshold-out-norminf"} <= skipped


def test_supercritical_instance_yields_no_checks():
    rep = soundness_report(complete(4), 0.9, label="hot")
    assert len(rep.checks) == 0
    assert not rep.violations
    assert len(rep.skipped) > 10  # every record gated or unchecked


def test_small_corpus_zero_violations():
    total = 0
    for item in corpus(8, seed=5, n_max=9):
        rep = soundness_report(
            item.digraph, item.p, label=item.label, workers=1
        )
        assert not rep.violations, item.label
        total += len(rep.checks)
    assert total > 40


def test_report_serializable():
    rep = soundness_report(complete(4), 0.25, label="k4")
    d = rep.to_dict()
    assert d["label"] == "k4"
    assert d["checks"] == len(rep.checks)
    assert d["violations"] == []
    import json

    assert json.dumps(d)
