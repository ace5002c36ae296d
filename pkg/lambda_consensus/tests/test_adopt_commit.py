"""Tests for the adopt-commit object."""

import pytest

from lambda_consensus.objects.adopt_commit import (
    AcPhase,
    AcRecord,
    Marker,
    Tag,
    ac_init,
    ac_step,
    ac_step_bound,
    ac_violations,
)
from lambda_consensus.objects.shared_memory import BOT, ac_a_reg, ac_b_reg, new_register_file
from lambda_consensus.utils.errors import ContractViolation, InternalFault


def run_to_completion(cursor, file):
    steps = 0
    while True:
        cursor, file, result, access = ac_step(cursor, file)
        steps += 1
        assert access.is_shared
        if result is not None:
            return cursor, file, result, steps


class TestInit:
    def test_cursor_starts_at_write_a(self):
        cursor = ac_init(1, 5, n=2)
        assert (cursor.pid, cursor.phase, cursor.proposal) == (1, AcPhase.WRITE_A, 5)

    def test_zero_is_a_proposal(self):
        assert ac_init(2, 0, n=2).proposal == 0

    def test_bot_rejected(self):
        with pytest.raises(ContractViolation):
            ac_init(1, BOT, n=2)

    def test_negative_rejected(self):
        with pytest.raises(ContractViolation):
            ac_init(1, -1, n=2)


class TestStepBound:
    @pytest.mark.parametrize("n, bound", [(1, 4), (3, 8), (9, 20)])
    def test_formula(self, n, bound):
        assert ac_step_bound(n) == bound

    def test_solo_run_matches_bound(self):
        _, _, _, steps = run_to_completion(ac_init(1, 3, n=9), new_register_file(9, 0))
        assert steps == ac_step_bound(9)


class TestSoloAndPairs:
    def test_solo_commits_own_value(self):
        cursor, _, result, steps = run_to_completion(ac_init(1, 5, n=1), new_register_file(1, 0))
        assert result == (Tag.COMMIT, 5)
        assert cursor.done
        assert steps == 4

    def test_sequential_same_value_commits(self):
        file = new_register_file(2, 0)
        _, file, first, _ = run_to_completion(ac_init(1, 4, n=2), file)
        _, file, second, _ = run_to_completion(ac_init(2, 4, n=2), file)
        assert first == second == (Tag.COMMIT, 4)

    def test_late_different_value_adopts_committed(self):
        file = new_register_file(2, 0)
        _, file, first, _ = run_to_completion(ac_init(1, 0, n=2), file)
        _, file, second, _ = run_to_completion(ac_init(2, 1, n=2), file)
        assert first == (Tag.COMMIT, 0)
        assert second == (Tag.ADOPT, 0)
        assert file.read(ac_b_reg(2)) == AcRecord(Marker.MULTI, 1)

    def test_lockstep_different_values_adopt(self):
        file = new_register_file(2, 0)
        cursors = {1: ac_init(1, 0, n=2), 2: ac_init(2, 1, n=2)}
        results = {}
        while len(results) < 2:
            for pid in (1, 2):
                if pid in results:
                    continue
                cursors[pid], file, result, _ = ac_step(cursors[pid], file)
                if result is not None:
                    results[pid] = result
        assert {tag for tag, _ in results.values()} == {Tag.ADOPT}
        assert ac_violations({1: 0, 2: 1}, results) == []

    def test_stepping_done_cursor_is_a_fault(self):
        cursor, file, _, _ = run_to_completion(ac_init(1, 5, n=1), new_register_file(1, 0))
        with pytest.raises(InternalFault):
            ac_step(cursor, file)

    def test_collect_keeps_a_summary_not_the_entries(self):
        cursors = []
        for file in (new_register_file(2, 0), new_register_file(2, 0).write(ac_a_reg(2), 5, writer=2)):
            cursor = ac_init(1, 5, n=2)
            for _ in range(3):
                cursor, file, _, _ = ac_step(cursor, file)
            cursors.append(cursor)
        assert cursors[0] == cursors[1]
        assert cursors[0].phase is AcPhase.WRITE_B and cursors[0].single


class TestViolations:
    def test_clean_results(self):
        results = {1: (Tag.COMMIT, 2), 2: (Tag.ADOPT, 2)}
        assert ac_violations({1: 2, 2: 3}, results) == []

    def test_unproposed_value(self):
        problems = ac_violations({1: 0}, {1: (Tag.COMMIT, 9)})
        assert ("validity" in {name for name, _ in problems})

    def test_obligation(self):
        problems = ac_violations({1: 4, 2: 4}, {1: (Tag.ADOPT, 4), 2: (Tag.COMMIT, 4)})
        assert [name for name, _ in problems] == ["obligation"]

    def test_weak_agreement(self):
        problems = ac_violations({1: 0, 2: 1}, {1: (Tag.COMMIT, 0), 2: (Tag.ADOPT, 1)})
        assert [name for name, _ in problems] == ["weak_agreement"]
