import numpy as np
import pytest
from hypothesis import given, strategies as st

from levy_quant.errors import ParseError
from levy_quant.marketdata import (QUOTE_HEADER, RETURN_HEADER, ReturnSeries, VolQuote, load_quotes, load_returns,
                                   write_quotes, write_returns)

finite = st.floats(1e-6, 1e6, allow_nan=False, allow_infinity=False)


def test_empty_section(tmp_path):
    path = tmp_path / "q.csv"
    path.write_text(QUOTE_HEADER + "\n")
    assert load_quotes(path) == []


def test_negative_vol_names_line(tmp_path):
    path = tmp_path / "q.csv"
    path.write_text(QUOTE_HEADER + "\n1.0,100,0.2,1\n0.5,90,-0.1,1\n")
    with pytest.raises(ParseError) as exc:
        load_quotes(path)
    assert exc.value.context["line"] == 3 and exc.value.context["field"] == "implied_vol"


@pytest.mark.parametrize("body", ["1.0,100,0.2\n", "1.0,abc,0.2,1\n", "1.0,100,nan,1\n"])
def test_malformed_rows(tmp_path, body):
    path = tmp_path / "q.csv"
    path.write_text(QUOTE_HEADER + "\n" + body)
    with pytest.raises(ParseError):
        load_quotes(path)


def test_bad_header(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("day,ret\n2020-01-02,0.1\n")
    with pytest.raises(ParseError):
        load_returns(path)


def test_bad_date(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text(RETURN_HEADER + "\n2020-13-02,0.1\n")
    with pytest.raises(ParseError):
        load_returns(path)


@given(st.lists(st.tuples(finite, finite, finite, st.floats(0, 10)), max_size=20))
def test_quote_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("q") / "q.csv"
    quotes = [VolQuote(*r) for r in rows]
    write_quotes(path, quotes)
    assert load_quotes(path) == quotes


@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=50))
def test_return_round_trip(tmp_path_factory, rets):
    path = tmp_path_factory.mktemp("r") / "r.csv"
    write_returns(path, ReturnSeries(np.array(rets)))
    back = load_returns(path)
    assert back.returns.tolist() == rets
    write_returns(path, back)
    assert load_returns(path).dates == back.dates


def test_weekday_dates(tmp_path):
    write_returns(tmp_path / "r.csv", ReturnSeries(np.zeros(6)))
    dates = load_returns(tmp_path / "r.csv").dates
    assert dates[0] == "2000-01-03" and dates[5] == "2000-01-10"


def test_crlf_tolerated(tmp_path):
    path = tmp_path / "q.csv"
    path.write_bytes((QUOTE_HEADER + "\r\n1.0,100,0.2,1\r\n").encode())
    assert load_quotes(path) == [VolQuote(1.0, 100.0, 0.2, 1.0)]


def test_numpy_scalars_written_as_plain_numbers(tmp_path):
    write_quotes(tmp_path / "q.csv", [VolQuote(np.float64(0.5), np.float64(100.0), np.float64(0.2))])
    assert (tmp_path / "q.csv").read_text().splitlines()[1] == "0.5,100.0,0.2,1.0"
