
import pytest
import numpy as np
from astropy.table import Table

from gdl.core.acgan import GanSpec, build_generator
from gdl.core.daylight import LABEL_NAMES, REFERENCE_WWR_RANGES, REFERENCE_SDA_RANGES
from gdl.core.reports import Table1Row, Table1Report, TABLE1_COLUMNS, make_table1_report, ascii_plot
from gdl.core.exc import EmptyDataset, InvalidLabel, UntrainedModelError

FACADE_SPEC = GanSpec(latent_dim=8, label_names=LABEL_NAMES, image_shape=(32, 72),
                      generator_channels=(4, 4, 2), discriminator_channels=(2, 2, 2))

def row(label, wwr_label, sda_label, sample=0, wwr=10.0, sda=10.0):
	return Table1Row(label=label, sample=sample, wwr=wwr, sda=sda, wwr_label=wwr_label, sda_label=sda_label,
	                 psg_wwr=REFERENCE_WWR_RANGES[label], psg_sda=REFERENCE_SDA_RANGES[label])

@pytest.fixture
def facade_generator():
	generator = build_generator(FACADE_SPEC, seed=6)
	generator.trained = True
	return generator

# reports
# -------

def test_disagreement_rows_are_kept(tmp_path):
	report = Table1Report([row("A", "A", "A"), row("B", "C", "B", wwr=25.0, sda=30.0), row("E", "E", "D", sda=70.0)])
	assert [r.agrees for r in report.rows] == [True, False, False]
	table = Table.read(report.write(tmp_path / "table1.csv"), format="ascii.csv")
	assert table.colnames == list(TABLE1_COLUMNS)
	assert len(table) == 3
	assert list(table["wwr_label"]) == ["A", "C", "E"]
	assert table["psg_wwr_max"][1] == REFERENCE_WWR_RANGES["B"][1]

def test_report_rejects_bad_rows():
	with pytest.raises(EmptyDataset):
		Table1Report([])
	with pytest.raises(InvalidLabel):
		Table1Report([row("A", "F", "A")])

def test_mean_wwr_and_confusion(tmp_path):
	report = Table1Report([row("A", "A", "A", wwr=2.0), row("A", "A", "B", sample=1, wwr=4.0), row("D", "D", "D", wwr=35.0)])
	assert report.meanWwr() == {"A": 3.0, "D": 35.0}
	matrix = report.confusion()
	assert matrix.sum() == 3
	assert matrix[0, 0] == 1 and matrix[0, 1] == 1 and matrix[3, 3] == 1
	table = Table.read(report.writeConfusion(tmp_path / "confusion.csv"), format="ascii.csv")
	assert table.colnames == ["label"] + list(LABEL_NAMES)

def test_make_report(facade_generator, short_schedule, tmp_path):
	report = make_table1_report(facade_generator, n=2, seed=1, schedule=short_schedule)
	assert len(report) == 2 * len(LABEL_NAMES)
	assert [r.label for r in report.rows] == [name for name in LABEL_NAMES for _ in range(2)]
	for r in report.rows:
		assert 0 <= r.wwr <= 100 and 0 <= r.sda <= 100
		assert r.wwr_label in LABEL_NAMES and r.sda_label in LABEL_NAMES
	again = make_table1_report(facade_generator, n=2, seed=1, schedule=short_schedule)
	assert report.rows == again.rows

def test_make_report_with_psg_ranges(facade_generator, short_schedule):
	psg = Table(rows=[("A", 3, 0.5, 2.0, 0.0, 10.0), ("B", 0, np.nan, np.nan, np.nan, np.nan),
	                  ("C", 2, 30.0, 40.0, 45.0, 50.0), ("D", 0, np.nan, np.nan, np.nan, np.nan),
	                  ("E", 1, 90.0, 95.0, 85.0, 85.0)],
	            names=("label", "count", "wwr_min", "wwr_max", "sda_min", "sda_max"))
	report = make_table1_report(facade_generator, n=1, seed=2, schedule=short_schedule, psg=psg)
	assert {r.wwr_label for r in report.rows} <= {"A", "C", "E"}
	assert np.isnan(report.rows[1].psg_wwr[0])

def test_make_report_needs_samples(facade_generator):
	with pytest.raises(EmptyDataset):
		make_table1_report(facade_generator, n=0)

def test_make_report_untrained():
	with pytest.raises(UntrainedModelError):
		make_table1_report(build_generator(FACADE_SPEC), n=1)

def test_make_report_wrong_label_space():
	spec = GanSpec(latent_dim=8, image_shape=(32, 72), generator_channels=(4, 4, 2), discriminator_channels=(2, 2, 2))
	generator = build_generator(spec)
	generator.trained = True
	with pytest.raises(InvalidLabel):
		make_table1_report(generator, n=1)

# text plots
# ----------

def test_ascii_plot_layout():
	text = ascii_plot({"train": [1.0, 0.5, 0.25], "val": [1.2, 0.8, 0.6]}, width=20, height=5, title="loss")
	lines = text.splitlines()
	assert lines[0] == "loss"
	assert len(lines) == 1 + 5 + 2
	assert lines[1].lstrip().startswith("1.2 |")
	assert lines[5].startswith("0.25 |")
	assert "* train" in lines[-1] and "o val" in lines[-1]
	assert all(len(line) == len(lines[1]) for line in lines[1:6])

def test_ascii_plot_extremes_on_edges():
	lines = ascii_plot({"x": [0.0, 1.0]}, width=10, height=4).splitlines()
	assert lines[0].endswith("|" + " " * 9 + "*")
	assert lines[3].endswith("|*" + " " * 9)

def test_ascii_plot_skips_non_finite():
	assert ascii_plot({"x": [float("nan")]}) == "(no data)"
	assert ascii_plot({}, title="empty") == "empty\n(no data)"
	text = ascii_plot({"x": [1.0, float("inf"), 2.0]}, width=10, height=3)
	assert "".join(text.splitlines()[:3]).count("*") == 2

def test_ascii_plot_too_small():
	with pytest.raises(ValueError):
		ascii_plot({"x": [1.0]}, width=1)
