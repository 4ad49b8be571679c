import pytest

from dsst import experiments as ex


def test_unknown_preset():
    with pytest.raises(ValueError):
        ex.run("table9")


def test_table1_rows():
    rows = ex.run_table1(reps=1, Ht_values=(20, 40), Hf_values=(4,))
    assert [(r["Ht"], r["Hf"]) for r in rows] == [(20, 4), (40, 4)]
    assert rows[0]["ratio"] == 1.0 and rows[1]["frames"] == (8192 - 1) // 40 + 1


def test_table2_rows():
    (row,) = ex.run_table2(reps=1, Hf_values=(4,))
    assert row["Nf"] == 2048 and row["f2"] == 80.0
    assert row["elapsed_selective"] < row["elapsed_full"]


def test_fig3_rows():
    rows = ex.run_fig3(Ht_values=(20,), Hf_values=(8, 100))
    assert rows[0]["reduction"] > 0.5
    assert abs(rows[1]["reduction"]) < 0.3


def test_fig6_rows():
    rows = ex.run_fig6(factors=(8,))
    (r,) = rows
    assert r["snr_sst_x1"] >= r["snr_sst_x3"]
    assert {"snr_stft_x1", "snr_stft_x2", "snr_stft_x3"} <= set(r)


def test_fig7_rows():
    rows = ex.run_fig7(f_w_values=(0, 10), input_snrs=(5.0,))
    assert [r["f_w"] for r in rows] == [0, 10]
    assert rows[1]["snr_sst_x1"] > rows[0]["snr_sst_x1"]
    assert "snr_fullsst_x3" in rows[0]


def test_bounds_check_rows():
    rows = ex.run_bounds_check(Hf_values=(16, 80))
    assert rows[0]["reduction_tone"] > 0.5 and abs(rows[1]["reduction_tone"]) < 0.3
    assert rows[0]["hf_rf"] == pytest.approx(60.02, abs=0.01)
