import math

import numpy as np
import pytest

from src.exporter import ResultExporter, format_value


@pytest.mark.parametrize("value, expected", [
    (None, ""),
    (True, "true"),
    (False, "false"),
    (math.nan, ""),
    (0.1, "0.1"),
    (1 / 3, "0.333333333333333"),
    (2.1559209e-06, "2.1559209e-06"),
    (np.float64(1e7), "10000000"),
    (np.int64(64), "64"),
    ("NC-BFSK", "NC-BFSK"),
])
def test_format_value(value, expected):
    assert format_value(value) == expected


def test_csv_layout(tmp_path):
    exporter = ResultExporter(str(tmp_path))
    rows = [{"scheme": "4QAM", "M": 4, "e_total": 0.5, "extra": 1}, {"scheme": "DOQPSK", "M": 4}]
    path = exporter.export_csv(rows, ["scheme", "M", "e_total"], str(tmp_path / "out.csv"))

    raw = (tmp_path / "out.csv").read_bytes()
    assert b"\r\n" not in raw
    assert raw.decode("utf-8").splitlines() == ["scheme,M,e_total", "4QAM,4,0.5", "DOQPSK,4,"]
    assert path == str(tmp_path / "out.csv")
    assert not list(tmp_path.glob("*.tmp"))


def test_default_path_is_timestamped(tmp_path):
    exporter = ResultExporter(str(tmp_path / "nested"))
    path = exporter.export_csv([], ["d"], command="validate-ser")
    assert path.endswith(f"validate_ser_{exporter.timestamp}.csv")


def test_failed_write_leaves_no_files(tmp_path):
    exporter = ResultExporter(str(tmp_path))
    target = tmp_path / "out.csv"

    def explode(f):
        f.write("partial")
        raise RuntimeError("disk full")

    with pytest.raises(RuntimeError):
        exporter._write_atomically(target, explode)
    assert list(tmp_path.iterdir()) == []


def test_table_pivot(tmp_path):
    exporter = ResultExporter(str(tmp_path))
    rows = [
        {"d": d, "eta": eta, "m_hat": m}
        for (d, eta), m in {(1.0, 2.5): 64, (1.0, 3.0): 64, (10.0, 2.5): 64, (10.0, 3.0): 43}.items()
    ]
    path = exporter.export_table(rows, ["d"], ["eta"], "m_hat", str(tmp_path / "grid.csv"),
                                 header_format=lambda eta: f"eta={eta:g}")
    lines = (tmp_path / "grid.csv").read_text(encoding="utf-8").splitlines()
    assert lines == ["d,eta=2.5,eta=3", "1,64,64", "10,64,43"]
    assert path.endswith("grid.csv")


def test_config_sidecar(tmp_path):
    exporter = ResultExporter(str(tmp_path))
    path = exporter.export_config('{"d": 10.0}\n', str(tmp_path / "sweep.csv"))
    assert path == str(tmp_path / "sweep.config.json")
    assert (tmp_path / "sweep.config.json").read_text(encoding="utf-8") == '{"d": 10.0}\n'


def test_explicit_path_leaves_output_dir_alone(tmp_path):
    exporter = ResultExporter(str(tmp_path / "unused"))
    exporter.export_csv([{"d": 1.0}], ["d"], str(tmp_path / "elsewhere" / "out.csv"))
    assert (tmp_path / "elsewhere" / "out.csv").is_file()
    assert not (tmp_path / "unused").exists()
