import shutil
from dataclasses import replace
from pathlib import Path

import pytest
from hypothesis import given

from decarb_planner.domain import validate_instance
from decarb_planner.workbook import (
    TABLES, AvailabilityValueError, MissingTableError, PeriodMismatchError, WorkbookError,
    instance_to_workbook, norm, read_workbook, template_workbook, to_instance, write_results,
    write_workbook,
)

from conftest import SCENARIO_1, SCENARIO_2, small_instances, tiny_instance


@pytest.fixture
def s2_copy(tmp_path):
    dest = tmp_path / "wb"
    shutil.copytree(SCENARIO_2, dest)
    return dest


def _edit(path: Path, table: str, old: str, new: str) -> None:
    f = path / f"{table}.csv"
    text = f.read_text(encoding="utf-8")
    assert old in text
    f.write_text(text.replace(old, new), encoding="utf-8")


def test_bundled_workbook_shape():
    wb = read_workbook(SCENARIO_2)
    assert wb.num_periods == 6
    assert set(TABLES) <= set(wb.tables)
    assert len(wb["PLANT_DATA"].rows) == 10


def test_plant_category_and_fuel_inherit_from_row_above():
    inst = to_instance(read_workbook(SCENARIO_2))
    fuels = [p.fuel for p in inst.plants]
    assert fuels[:5] == ["solar", "solar", "natural_gas", "natural_gas", "natural_gas"]
    assert fuels[6:8] == ["coal", "coal"]
    assert [p.category for p in inst.plants].count("fossil") == 6


def test_single_value_row_inherits_across_periods(s2_copy):
    text = (s2_copy / "FUEL_COST_DATA.csv").read_text(encoding="utf-8").splitlines()
    text = [("Natural Gas,25,,,,," if ln.startswith("Natural Gas") else ln) for ln in text]
    (s2_copy / "FUEL_COST_DATA.csv").write_text("\n".join(text) + "\n", encoding="utf-8")
    inst = to_instance(read_workbook(s2_copy))
    gas = [p for p in inst.plants if p.fuel == "natural_gas"]
    assert all(p.op_cost_per_period == (25.0,) * 6 for p in gas)


def test_blank_row_repeats_row_above(tmp_path):
    inst = tiny_instance(K=3)
    write_workbook(instance_to_workbook(inst), tmp_path)
    f = tmp_path / "ALT_SOLID_CI.csv"
    f.write_text(f.read_text() + "SOLID_2,,,\n")
    wb = read_workbook(tmp_path)
    assert wb["ALT_SOLID_CI"].numbers("SOLID_2") == wb["ALT_SOLID_CI"].numbers("SOLID_1")


def test_leading_blank_is_an_error_naming_the_cell(tmp_path):
    write_workbook(instance_to_workbook(tiny_instance(K=3)), tmp_path)
    _edit(tmp_path, "CCS_DATA", "CCS_1_GEN_COST,30", "CCS_1_GEN_COST,")
    with pytest.raises(WorkbookError, match=r"CCS_DATA: row 'CCS_1_GEN_COST', column '1'"):
        read_workbook(tmp_path)


def test_missing_table_is_named(s2_copy):
    (s2_copy / "CCS_DATA.csv").unlink()
    with pytest.raises(MissingTableError, match="CCS_DATA") as exc:
        read_workbook(s2_copy)
    assert exc.value.missing == ["CCS_DATA"]


def test_empty_directory_lists_all_tables(tmp_path):
    with pytest.raises(MissingTableError) as exc:
        read_workbook(tmp_path)
    assert exc.value.missing == list(TABLES)


def test_missing_directory_is_io_error(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_workbook(tmp_path / "absent")


def test_period_count_mismatch_lists_offenders(s2_copy):
    f = s2_copy / "NET_CI_DATA.csv"
    lines = f.read_text(encoding="utf-8").splitlines()
    f.write_text("\n".join(ln.rsplit(",", 1)[0] for ln in lines) + "\n", encoding="utf-8")
    with pytest.raises(PeriodMismatchError) as exc:
        read_workbook(s2_copy)
    assert exc.value.counts["NET_CI_DATA"] == 5
    assert exc.value.counts["CCS_DATA"] == 6
    assert "NET_CI_DATA=5" in str(exc.value)


def test_run_config_period_count_must_agree(s2_copy):
    _edit(s2_copy, "RUN_CONFIG", "num_periods,6", "num_periods,5")
    with pytest.raises(PeriodMismatchError):
        read_workbook(s2_copy)


def test_bad_availability_cell_is_named(s2_copy):
    _edit(s2_copy, "TECH_IMPLEMENTATION_TIME", "SOLAR,YES", "SOLAR,maybe")
    with pytest.raises(AvailabilityValueError, match=r"row 'SOLAR', column '1'.*'maybe'"):
        read_workbook(s2_copy)


def test_availability_is_case_insensitive(s2_copy):
    _edit(s2_copy, "TECH_IMPLEMENTATION_TIME", "SOLAR,YES", "SOLAR,yes")
    inst = to_instance(read_workbook(s2_copy))
    assert inst.availability("SOLAR", 1)


def test_non_numeric_cell_is_named(s2_copy):
    _edit(s2_copy, "CCS_DATA", "CCS_1_GEN_COST,", "CCS_1_GEN_COST,abc,")
    with pytest.raises(WorkbookError, match=r"CCS_DATA: row 'CCS_1_GEN_COST', column '1'"):
        to_instance(read_workbook(s2_copy))


def test_unknown_plant_fuel_names_the_plant(s2_copy):
    _edit(s2_copy, "PLANT_DATA", "Oil", "Peat")
    with pytest.raises(WorkbookError, match=r"FUEL_COST_DATA: row 'PEAT'.*PLANT_DATA row 'P6'"):
        to_instance(read_workbook(s2_copy))


def test_parasitic_loss_of_one_loads_then_fails_validation(tmp_path):
    write_workbook(instance_to_workbook(tiny_instance(K=2)), tmp_path)
    _edit(tmp_path, "CCS_DATA", "CCS_1_PARASITIC_LOSS,0.15,0.15", "CCS_1_PARASITIC_LOSS,1,1")
    inst = to_instance(read_workbook(tmp_path))
    assert inst.ccs_techs[0].parasitic_loss_per_period == (1.0, 1.0)
    assert any("parasitic loss" in v.rule for v in validate_instance(inst))


def test_all_no_availability(tmp_path):
    inst = tiny_instance(K=3)
    write_workbook(instance_to_workbook(inst), tmp_path)
    f = tmp_path / "TECH_IMPLEMENTATION_TIME.csv"
    f.write_text(f.read_text().replace("YES", "NO"))
    loaded = to_instance(read_workbook(tmp_path))
    assert all(not any(v) for v in loaded.availability.available.values())
    assert set(loaded.availability.available) == set(inst.tech_ids())


def test_scenarios_differ_only_in_implementation_time():
    for name in TABLES:
        a = (SCENARIO_1 / f"{name}.csv").read_bytes()
        b = (SCENARIO_2 / f"{name}.csv").read_bytes()
        assert (a == b) == (name != "TECH_IMPLEMENTATION_TIME"), name
    i1 = to_instance(read_workbook(SCENARIO_1))
    i2 = to_instance(read_workbook(SCENARIO_2))
    assert replace(i1, availability=i2.availability) == i2


def test_compensatory_alias_is_accepted(s2_copy):
    (s2_copy / "RENEWABLE_CI_DATA.csv").rename(s2_copy / "COMPENSATORY_CI_DATA.csv")
    inst = to_instance(read_workbook(s2_copy))
    assert len(inst.renewables) == 5


def test_label_normalisation():
    assert norm("Natural Gas") == norm("NATURAL_GAS") == norm(" natural-gas ") == "NATURAL_GAS"
    assert norm("Hydropower") == "HYDRO"


def test_instance_round_trip_bundled(tmp_path):
    inst = to_instance(read_workbook(SCENARIO_2))
    write_workbook(instance_to_workbook(inst), tmp_path)
    assert to_instance(read_workbook(tmp_path)) == inst


@given(small_instances())
def test_instance_round_trip(tmp_path_factory, inst):
    path = tmp_path_factory.mktemp("rt")
    write_workbook(instance_to_workbook(inst), path)
    assert to_instance(read_workbook(path)) == inst


def test_conflicting_shared_rows_are_refused():
    inst = tiny_instance()
    p = replace(inst.plants[0], id="P9", op_cost_per_period=(1.0, 2.0))
    with pytest.raises(ValueError, match="FUEL_COST_DATA"):
        instance_to_workbook(replace(inst, plants=(*inst.plants, p)))


@pytest.mark.parametrize("K", [1, 6, 50])
def test_template_parses(tmp_path, K):
    write_workbook(template_workbook(K), tmp_path)
    wb = read_workbook(tmp_path)
    assert wb.num_periods == K
    header = (tmp_path / "CCS_DATA.csv").read_text().splitlines()[0].split(",")
    assert header[1:] == [str(k) for k in range(1, K + 1)]


@pytest.mark.parametrize("K", [0, 51])
def test_template_rejects_bad_period_count(K):
    with pytest.raises(ValueError):
        template_workbook(K)


def test_write_results_needs_reports(tmp_path):
    with pytest.raises(ValueError):
        write_results(tmp_path, [], None)
