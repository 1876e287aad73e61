"""Pattern classification and rule evaluation."""

import itertools

import pytest

from gridvault import (
    AlertRule,
    CellAddress,
    CellValue,
    PatternLabel,
    RuleKind,
    classify_pattern,
    evaluate,
    parse_region,
)
from gridvault import alerts as alerts_mod
from gridvault.errors import DuplicateRuleId, RuleInvalid, WindowTooShort

from conftest import formula_cell, num, one_cell, snap, txt


class TestClassifyPattern:
    @pytest.mark.parametrize(
        "window,label",
        [
            ([40, 40, 40, 50], PatternLabel.STEP),
            ([20, 30, 40, 50], PatternLabel.TREND),
            ([40, 49, 40, 50], PatternLabel.OSCILLATION),
            ([49, 49, 40, 50], PatternLabel.REVERSAL),
        ],
    )
    def test_reference_sequences(self, window, label):
        assert classify_pattern(window) == label

    def test_four_reference_sequences_pairwise_distinct(self):
        labels = {
            classify_pattern(w)
            for w in ([40, 40, 40, 50], [20, 30, 40, 50], [40, 49, 40, 50], [49, 49, 40, 50])
        }
        assert len(labels) == 4

    def test_stable(self):
        assert classify_pattern([5, 5, 5, 5]) == PatternLabel.STABLE

    def test_non_numeric(self):
        assert classify_pattern([CellValue.text("x"), CellValue.number(1)]) == PatternLabel.NON_NUMERIC
        assert classify_pattern([CellValue.boolean(True), CellValue.number(1)]) == PatternLabel.NON_NUMERIC

    def test_downward_step_and_trend(self):
        assert classify_pattern([50, 50, 50, 40]) == PatternLabel.STEP
        assert classify_pattern([50, 40, 30, 20]) == PatternLabel.TREND

    def test_irregular(self):
        # flat segment in the middle, same-sign moves around it
        assert classify_pattern([1, 2, 2, 3]) == PatternLabel.IRREGULAR

    def test_window_too_short(self):
        with pytest.raises(WindowTooShort):
            classify_pattern([1])

    def test_length_two(self):
        assert classify_pattern([1, 1]) == PatternLabel.STABLE
        assert classify_pattern([1, 2]) == PatternLabel.STEP

    def test_totality_exhaustive(self):
        # every 4-value window over {0..3} gets exactly one label
        for window in itertools.product(range(4), repeat=4):
            label = classify_pattern(list(window))
            assert isinstance(label, PatternLabel)

    def test_scale_covariance(self):
        for window in itertools.product(range(4), repeat=4):
            base = classify_pattern(list(window))
            for k in (2.0, 0.5, 137.0):
                assert classify_pattern([v * k for v in window]) == base

    def test_cellvalue_windows(self):
        window = [CellValue.number(v) for v in (40, 40, 40, 50)]
        assert classify_pattern(window) == PatternLabel.STEP


def mk_rule(kind=RuleKind.THRESHOLD_UP, target="S!A1", **kw):
    defaults = {"rule_id": "r1", "target": parse_region(target), "kind": kind}
    defaults.update(kw)
    return AlertRule(**defaults)


class TestRuleValidation:
    def test_range_breach_lo_gt_hi(self):
        with pytest.raises(RuleInvalid):
            mk_rule(RuleKind.RANGE_BREACH, lo=5, hi=1)

    def test_window_minimum(self):
        with pytest.raises(RuleInvalid):
            mk_rule(threshold=50, window=1)

    def test_delta_positive(self):
        with pytest.raises(RuleInvalid):
            mk_rule(RuleKind.DELTA_ABS, delta=0)

    def test_json_round_trip(self):
        rule = mk_rule(threshold=50.0, window=6)
        assert AlertRule.from_json(rule.to_json()) == rule


class TestThresholdSemantics:
    rule = [mk_rule(threshold=50.0)]

    def test_fires_on_crossing(self):
        firings = evaluate(self.rule, one_cell(40), one_cell(50))
        assert len(firings) == 1
        assert firings[0].old_value == 40.0
        assert firings[0].new_value == 50.0

    def test_no_fire_below(self):
        assert evaluate(self.rule, one_cell(40), one_cell(49)) == []

    def test_no_fire_without_crossing(self):
        assert evaluate(self.rule, one_cell(50), one_cell(55)) == []

    def test_no_fire_on_first_commit(self):
        assert evaluate(self.rule, None, one_cell(99)) == []

    def test_no_fire_non_numeric_old(self):
        old = snap({"S": {(1, 1): txt("x")}})
        assert evaluate(self.rule, old, one_cell(50)) == []

    def test_threshold_down(self):
        rule = [mk_rule(RuleKind.THRESHOLD_DOWN, threshold=10.0)]
        assert len(evaluate(rule, one_cell(15), one_cell(10))) == 1
        assert evaluate(rule, one_cell(15), one_cell(11)) == []
        assert evaluate(rule, one_cell(10), one_cell(5)) == []


class TestOtherRuleKinds:
    def test_delta_abs(self):
        rule = [mk_rule(RuleKind.DELTA_ABS, delta=5.0)]
        assert len(evaluate(rule, one_cell(10), one_cell(16))) == 1
        assert evaluate(rule, one_cell(10), one_cell(15)) == []  # strict >

    def test_range_breach_entry_only(self):
        rule = [mk_rule(RuleKind.RANGE_BREACH, lo=0.0, hi=100.0)]
        assert len(evaluate(rule, one_cell(50), one_cell(101))) == 1
        assert evaluate(rule, one_cell(101), one_cell(102)) == []  # already out
        assert evaluate(rule, one_cell(50), one_cell(99)) == []

    def test_formula_changed(self):
        rule = [mk_rule(RuleKind.FORMULA_CHANGED)]
        old = snap({"S": {(1, 1): formula_cell(1, "=X1")}})
        new = snap({"S": {(1, 1): formula_cell(1, "=X2")}})
        assert len(evaluate(rule, old, new)) == 1
        assert evaluate(rule, old, old) == []

    def test_region_target(self):
        rule = [mk_rule(threshold=50.0, target="S!A1:B2")]
        old = snap({"S": {(1, 1): num(40), (2, 2): num(40), (9, 9): num(40)}})
        new = snap({"S": {(1, 1): num(50), (2, 2): num(60), (9, 9): num(70)}})
        firings = evaluate(rule, old, new)
        assert [str(f.address) for f in firings] == ["S!A1", "S!B2"]


class TestEvaluateProperties:
    def test_determinism_and_order(self):
        rules = [
            mk_rule(threshold=50.0, rule_id="zz", target="S!A1:B2"),
            mk_rule(threshold=50.0, rule_id="aa", target="S!A1:B2"),
        ]
        old = snap({"S": {(1, 1): num(40), (1, 2): num(40)}})
        new = snap({"S": {(1, 1): num(50), (1, 2): num(50)}})
        first = evaluate(rules, old, new)
        second = evaluate(rules, old, new)
        assert first == second
        assert [f.rule_id for f in first] == ["aa", "aa", "zz", "zz"]

    def test_no_change_no_fire(self):
        rules = [
            mk_rule(threshold=1.0, rule_id="a"),
            mk_rule(RuleKind.DELTA_ABS, delta=0.1, rule_id="b"),
            mk_rule(RuleKind.RANGE_BREACH, lo=0.0, hi=0.5, rule_id="c"),
        ]
        s = one_cell(1)
        assert evaluate(rules, s, s) == []


class TestPersistence:
    def test_add_and_list(self, store):
        store.commit("w1", one_cell(1), "ada")
        rule = mk_rule(threshold=50.0)
        assert alerts_mod.add_rule(store, "w1", rule) == "r1"
        assert alerts_mod.list_rules(store, "w1") == [rule]

    def test_duplicate_rule_id(self, store):
        store.commit("w1", one_cell(1), "ada")
        alerts_mod.add_rule(store, "w1", mk_rule(threshold=50.0))
        with pytest.raises(DuplicateRuleId):
            alerts_mod.add_rule(store, "w1", mk_rule(threshold=60.0))

    def test_commit_time_evaluation_with_window(self, store):
        alerts_mod.add_rule(store, "w1", mk_rule(threshold=50.0))
        all_firings = []
        for v in (40, 40, 40, 50):
            record = store.commit("w1", one_cell(v), "ada")
            all_firings += alerts_mod.evaluate_commit(store, "w1", record)
        assert len(all_firings) == 1
        firing = all_firings[0]
        assert firing.window_values == (40, 40, 40, 50)
        assert firing.pattern == PatternLabel.STEP
        assert firing.commit_id == store.head("w1").commit_id
        persisted = alerts_mod.list_firings(store, "w1")
        assert len(persisted) == 1
        assert persisted[0]["pattern"] == "Step"
