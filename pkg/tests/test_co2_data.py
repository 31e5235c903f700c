import numpy as np
import pytest

from gphcrb import co2
from gphcrb.errors import DataGap, DuplicateMonth, MalformedRow

SAMPLE = """\
# comment line
  1995    1    1995.0417     359.92     359.92     359.77    30
  1995    2    1995.1250     360.45     360.45     359.80    30
"""


class TestParse:
    def test_comment_only_gives_no_records(self):
        assert co2.parse_co2("# just a comment\n") == []

    def test_plain_row(self):
        recs = co2.parse_co2("1995  1 1995.042 359.92 359.92 359.77 30\n")
        assert len(recs) == 1
        r = recs[0]
        assert (r.year, r.month) == (1995, 1)
        assert r.decimal_date == 1995.042
        assert r.value_used == 359.92

    def test_sentinel_falls_back_to_interpolated(self):
        recs = co2.parse_co2("1964  2 1964.125 -99.99 360.10 359.9 -1\n")
        assert recs[0].average_ppm is None
        assert recs[0].value_used == 360.10

    def test_malformed_row_reports_line(self):
        with pytest.raises(MalformedRow) as exc:
            co2.parse_co2("# header\n1995 1 x 359.92 359.92\n")
        assert exc.value.line_no == 2

    def test_short_row_rejected(self):
        with pytest.raises(MalformedRow):
            co2.parse_co2("1995 1 1995.042 359.92\n")

    def test_duplicate_month_rejected(self):
        text = SAMPLE + "  1995    1    1995.0417     359.92     359.92     359.77    30\n"
        with pytest.raises(DuplicateMonth):
            co2.parse_co2(text)

    def test_sorted_by_decimal_date(self):
        text = (
            "1995 2 1995.125 360.45 360.45 x_ignored\n".replace("x_ignored", "359.8 30")
            + "1995 1 1995.042 359.92 359.92 359.77 30\n"
        )
        recs = co2.parse_co2(text)
        assert [r.month for r in recs] == [1, 2]

    def test_year_out_of_range(self):
        with pytest.raises(MalformedRow):
            co2.parse_co2("1900 1 1900.042 300.0 300.0 300.0 30\n")


class TestWindow:
    def test_single_month(self):
        recs = co2.parse_co2(SAMPLE)
        data = co2.window(recs, (1995, 1), (1995, 1))
        assert data.n == 1
        assert data.ys[0] == 359.92

    def test_gap_detected(self):
        recs = co2.parse_co2(SAMPLE)
        with pytest.raises(DataGap):
            co2.window(recs, (1995, 1), (1995, 3))

    def test_unordered_window_rejected(self):
        recs = co2.parse_co2(SAMPLE)
        with pytest.raises(DataGap):
            co2.window(recs, (1995, 2), (1995, 1))


class TestSnapshot:
    def test_training_window_n108(self):
        recs = co2.load_snapshot()
        data = co2.window(recs, (1995, 1), (2003, 12))
        assert data.n == 108

    def test_validation_window_n147(self):
        recs = co2.load_snapshot()
        data = co2.window(recs, (2004, 1), (2016, 3))
        assert data.n == 147

    def test_monotone_dates_and_spacing(self):
        recs = co2.load_snapshot()
        dates = np.array([r.decimal_date for r in recs])
        gaps = np.diff(dates)
        assert np.all(gaps > 0)
        assert np.all(np.abs(gaps - 1.0 / 12.0) <= 0.1 / 12.0)

    def test_sentinels_resolved(self):
        recs = co2.load_snapshot()
        missing = [r for r in recs if r.average_ppm is None]
        assert len(missing) == 5
        assert all(r.value_used > 0 for r in missing)

    def test_values_plausible(self):
        recs = co2.load_snapshot()
        vals = np.array([r.value_used for r in recs])
        assert 300 < vals.min() < 320
        assert 400 < vals.max() < 420

    def test_normalized_csv_round_trip(self):
        recs = co2.load_snapshot()[:24]
        text = co2.to_normalized_csv(recs)
        assert text.splitlines()[0] == "year,month,decimal_date,ppm"
        again = co2.from_normalized_csv(text)
        assert len(again) == len(recs)
        for a, b in zip(again, recs):
            assert (a.year, a.month) == (b.year, b.month)
            assert abs(a.value_used - b.value_used) <= 0.005  # 2-decimal format
            assert abs(a.decimal_date - b.decimal_date) <= 5e-5
