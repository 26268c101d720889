"""The bundled synthetic cohort and its model files."""

import numpy as np
import pytest

import premval as pv
import premval.fixtures as fx


@pytest.fixture(scope="module")
def shipped():
    return {name: fx.bundled_path(name).read_text(encoding="utf-8")
            for name in (fx.MODEL_FILE, fx.BASE_MODEL_FILE, fx.TABLE_FILE)}


class TestShippedFiles:
    def test_writer_reproduces_bundled_bytes(self, shipped, tmp_path):
        for path in fx.write_fixture_files(tmp_path):
            assert path.read_text(encoding="utf-8") == shipped[path.name]

    def test_extended_file_is_the_extension_of_the_base_file(self, shipped):
        base = pv.parse_model_text(shipped[fx.BASE_MODEL_FILE])
        extended, attachments = pv.extend_model(base.model, base.lump_sums)
        assert pv.format_model(extended, attachments=attachments) == shipped[fx.MODEL_FILE]

    def test_table_text_matches_generator(self, shipped):
        assert fx.synthetic_table_text() == shipped[fx.TABLE_FILE]

    def test_table_is_labeled_synthetic(self, shipped):
        assert "SYNTHETIC" in shipped[fx.TABLE_FILE].splitlines()[0]

    def test_model_file_loads_to_builder_output(self, shipped):
        parsed = pv.parse_model_text(shipped[fx.MODEL_FILE])
        assert parsed.model == fx.dread_disease_model()
        assert parsed.attachments == {3: 1.0, 7: 1.0, 9: 1.0}


class TestSyntheticCohort:
    def test_cohort_is_closed(self, dread):
        """Occupancy plus accumulated dead is the starting population at all times."""
        table = dread.table
        alive = sum(table.occupancy[i] for i in range(1, 8)) + table.occupancy[9]
        dead = np.zeros(table.n + 1)
        for k in range(1, table.n + 1):
            dead[k] = dead[k - 1] + table.occupancy[7][k - 1] + table.occupancy[9][k - 1]
        np.testing.assert_array_equal(alive + dead, np.full(table.n + 1, 10_000_000.0))

    def test_population_starts_at_ten_million(self, dread):
        start = sum(dread.table.occupancy[i][0] for i in dread.table.occupancy)
        assert start == 10_000_000.0

    def test_terminal_stage_diagonals_are_exactly_zero(self, dread):
        for i in (3, 4, 5):
            assert (dread.seq.matrices[:, i - 1, i - 1] == 0.0).all()

    def test_one_period_state_diagonals_are_exactly_zero(self, dread):
        for i in (6, 7, 9):
            assert (dread.seq.matrices[:, i - 1, i - 1] == 0.0).all()

    def test_no_transition_outside_the_model_graph(self, dread):
        assert pv.pattern_violations(dread.seq, dread.model) == []

    def test_counts_are_integers(self, dread):
        for column in dread.table.occupancy.values():
            np.testing.assert_array_equal(column, np.round(column))
        for column in dread.table.decrements.values():
            np.testing.assert_array_equal(column, np.round(column))

    def test_entry_age_and_horizon(self, dread):
        assert dread.table.entry_age == fx.ENTRY_AGE == 40
        assert dread.table.n == fx.HORIZON == 25

    def test_earliest_arrivals(self, dread):
        got = [dread.offsets.offset(s) for s in range(1, 11)]
        assert got == [0, 1, 1, 2, 3, 4, 1, 2, 2, 3]
