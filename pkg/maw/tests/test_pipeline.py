import json
from dataclasses import replace

import pytest

from maw.errors import StageError, UsageError, WorkflowParseError, WorkflowValidationError
from maw.models import StaySource
from maw.pipeline.compare import compare_workflows, expand_osc_windows, sweep_variants
from maw.pipeline.engine import execute_workflow, select_stream
from maw.pipeline.parser import load_workflow, parse_workflow
from maw.pipeline.presets import PRESETS, get_preset
from maw.pipeline.scaling import linear_fit, scaling_probe
from maw.io.synth import generate_synthetic
from maw.pipeline.stages import StageContext, UserState, apply_stage, relabel_by_stays, tag_failure
from maw.pipeline.validation import ensure_valid, resolve_targets, validate_workflow
from maw.schemas import ChangePoints, StageKind, StageSpec, SynthConfig, WorkflowSpec
from maw.tests.conftest import make_record, make_stay


def labels(spec):
    return [stage.label for stage in spec.stages]


def codes(report):
    return sorted(d.code for d in report.diagnostics)


def stage(kind, target="auto", **cp):
    return StageSpec(kind=kind, change_points=ChangePoints(**cp), target=target)


# presets

def test_workflow2_corrects_after_clustering():
    assert labels(get_preset("workflow2")) == [
        "INCREMENTAL(records)", "STAY_DURATION", "OSC_CORRECTOR(stays)", "STAY_DURATION",
    ]


def test_workflow6_combines_both_clusterings():
    assert labels(get_preset("preset:workflow6")) == ["TRACE_SEG", "INCREMENTAL(stays)", "STAY_DURATION"]


def test_every_preset_is_valid():
    for name in PRESETS:
        assert validate_workflow(get_preset(name)).ok, name


def test_unknown_preset():
    with pytest.raises(UsageError):
        get_preset("workflow9")


# parsing

DOC = """{
  "name": "custom-ts",
  "input": "gps",
  "stages": [
    {"kind": "TRACE_SEG", "params": {"distance_km": 0.2, "duration_min": 5}},
    {"kind": "STAY_DURATION", "params": {"duration_min": 5}}
  ]
}"""


def test_parse_document():
    spec = parse_workflow(DOC)
    assert spec.name == "custom-ts"
    assert labels(spec) == ["TRACE_SEG", "STAY_DURATION"]
    assert spec.stages[0].change_points.distance_km_threshold == 0.2


def test_parse_preset_reference():
    assert parse_workflow("preset:workflow3") == get_preset("workflow3")


def test_negative_duration_is_rejected():
    with pytest.raises(WorkflowParseError) as info:
        parse_workflow(DOC.replace('"duration_min": 5}}\n', '"duration_min": -1}}\n'))
    assert info.value.field == "duration_min"
    assert info.value.line == 6


def test_out_of_range_needs_override():
    doc = DOC.replace('"distance_km": 0.2', '"distance_km": 5')
    with pytest.raises(WorkflowParseError) as info:
        parse_workflow(doc)
    assert info.value.field == "distance_km"
    assert info.value.line == 5

    spec = parse_workflow(doc.replace('"distance_km": 5', '"distance_km": 5, "override": true'))
    assert codes(validate_workflow(spec)) == ["W105"]


def test_missing_change_point():
    with pytest.raises(WorkflowParseError) as info:
        parse_workflow('{"stages": [{"kind": "TRACE_SEG", "params": {"duration_min": 5}}]}')
    assert info.value.field == "distance_km"


def test_unknown_kind_and_bad_json():
    with pytest.raises(WorkflowParseError) as info:
        parse_workflow('{"stages": [\n{"kind": "DBSCAN"}\n]}')
    assert info.value.line == 2
    with pytest.raises(WorkflowParseError) as info:
        parse_workflow('{"stages": [\n')
    assert info.value.line is not None


def test_integrator_branches_accept_presets():
    doc = {
        "name": "fused",
        "input": "both",
        "stages": [{
            "kind": "STAY_INTEGRATOR",
            "params": {
                "duration_min": 5,
                "osc_window_min": 5,
                "gps": "preset:workflow5",
                "cellular": [{"kind": "INCREMENTAL", "params": {"distance_km": 1, "duration_min": 5, "target": "records"}}],
                "split_intersecting": False,
            },
        }],
    }
    spec = parse_workflow(json.dumps(doc, indent=2))
    integrator = spec.stages[0]
    assert labels(WorkflowSpec(name="g", stages=integrator.gps)) == ["TRACE_SEG", "STAY_DURATION"]
    assert integrator.rules.split_intersecting is False
    assert validate_workflow(spec).ok


def test_load_workflow_from_file(tmp_path):
    path = tmp_path / "wf.json"
    path.write_text(DOC)
    assert load_workflow(str(path)).name == "custom-ts"
    with pytest.raises(UsageError):
        load_workflow(str(tmp_path / "missing.json"))


# validation

def test_duration_alone_has_no_producer():
    spec = WorkflowSpec(name="x", stages=[stage(StageKind.STAY_DURATION)])
    assert codes(validate_workflow(spec)) == ["E001"]


def test_workflow3_is_valid_with_warning():
    report = validate_workflow(get_preset("workflow3"))
    assert report.ok
    assert codes(report) == ["W101"]


def test_integrator_with_one_stream():
    integrator = StageSpec(kind=StageKind.STAY_INTEGRATOR, gps=get_preset("workflow5").stages)
    report = validate_workflow(WorkflowSpec(name="x", input="both", stages=[integrator]))
    assert "E002" in codes(report)


def test_shape_errors():
    assert codes(validate_workflow(WorkflowSpec(name="x", stages=[]))) == ["E004"]
    both = WorkflowSpec(name="x", input="both", stages=get_preset("workflow5").stages)
    assert "E005" in codes(validate_workflow(both))


def test_warnings():
    ts_on_cell = WorkflowSpec(name="x", input="cellular", stages=get_preset("workflow5").stages)
    assert codes(validate_workflow(ts_on_cell)) == ["W102"]
    twice = get_preset("workflow5").stages + [stage(StageKind.STAY_DURATION)]
    assert "W104" in codes(validate_workflow(WorkflowSpec(name="x", stages=twice)))
    rederive = get_preset("workflow5").stages + [stage(StageKind.TRACE_SEG), stage(StageKind.STAY_DURATION)]
    assert "W103" in codes(validate_workflow(WorkflowSpec(name="x", stages=rederive)))


def test_ensure_valid_raises():
    with pytest.raises(WorkflowValidationError) as info:
        ensure_valid(WorkflowSpec(name="x", stages=[stage(StageKind.STAY_DURATION)]))
    assert [d.code for d in info.value.diagnostics] == ["E001"]
    assert info.value.exit_code == 2


def test_auto_targets_follow_producers():
    stages = [stage(StageKind.OSC_CORRECTOR), stage(StageKind.INCREMENTAL), stage(StageKind.OSC_CORRECTOR)]
    assert resolve_targets(stages) == ["records", "records", "stays"]


# execution

def test_select_stream_splits_strictly():
    records = [make_record(0, accuracy=99), make_record(1, accuracy=100)]
    assert select_stream(records, "gps", 100) == records[:1]
    assert select_stream(records, "cellular", 100) == records[1:]
    assert select_stream(records, "all", 100) == records


def test_execute_workflow5(dwell_pair_records):
    result = execute_workflow(get_preset("workflow5"), {"d1": dwell_pair_records})
    stays = result.stays["d1"]
    assert [(s.start, s.end) for s in stays] == [(0, 600), (1200, 1800)]
    assert all(s.source == StaySource.GPS for s in stays)
    labeled = result.labeled["d1"]
    assert len(labeled) == len(dwell_pair_records)
    assert labeled[11].is_transient
    assert result.profile.output_rows == {"labeled": 23, "stays": 2}
    assert [t.label for t in result.profile.stages] == ["TRACE_SEG", "STAY_DURATION"]
    assert sum(t.seconds for t in result.profile.stages) <= result.profile.total_seconds


def test_execute_empty_corpus():
    result = execute_workflow(get_preset("workflow1"), {})
    assert result.stays == {}
    assert result.profile.output_rows == {"labeled": 0, "stays": 0}


def test_cellular_workflow_sees_only_cellular_records(dwell_pair_records):
    result = execute_workflow(get_preset("workflow1"), {"d1": dwell_pair_records})
    assert result.labeled["d1"] == []
    assert result.stays["d1"] == []


def test_workers_do_not_change_results(dwell_pair_records):
    corpus = {"d1": dwell_pair_records, "d2": [replace(r, device_id="d2") for r in dwell_pair_records]}
    one = execute_workflow(get_preset("workflow6"), corpus, workers=1)
    two = execute_workflow(get_preset("workflow6"), corpus, workers=2)
    assert one.stays == two.stays
    assert one.labeled == two.labeled


def test_stay_correction_never_adds_stays():
    spec = get_preset("workflow2")
    targets = resolve_targets(spec.stages)
    corpus = generate_synthetic(SynthConfig(seed=2, n_users=8, days=2, gps_fraction=0.0, oscillation_rate=0.3))
    for device, records in corpus.records.items():
        state = UserState(device, records)
        counts = []
        for stage, target in zip(spec.stages, targets):
            state = apply_stage(stage, target, state, StageContext())
            counts.append(len(state.stays))
        assert counts[3] <= counts[2] <= counts[1], device


def test_relabel_by_stays():
    records = [make_record(t) for t in (0, 300, 450, 600)]
    labeled = relabel_by_stays(records, [make_stay(0, 300), make_stay(600, 900)])
    assert [item.stay_index for item in labeled] == [0, 0, -1, 1]


def test_tag_failure():
    error = tag_failure(ValueError("boom"), UserState("d7", []), 2, stage(StageKind.STAY_DURATION))
    assert isinstance(error, StageError)
    assert (error.device_id, error.stage_index, error.stage_kind) == ("d7", 2, "STAY_DURATION")


# comparison

def test_compare_needs_two_workflows(dwell_pair_records):
    with pytest.raises(UsageError):
        compare_workflows([get_preset("workflow5")], {"d1": dwell_pair_records})


def test_identical_specs_give_identical_rows(dwell_pair_records):
    spec = get_preset("workflow5")
    report, _ = compare_workflows([spec, spec.renamed("again")], {"d1": dwell_pair_records})
    assert report.cohort_size == 1
    assert report.rows[0].metrics == report.rows[1].metrics
    assert report.rows[0].stays == 2


def test_sweep_variant_names():
    variants = sweep_variants(get_preset("workflow5"))
    assert len(variants) == 9
    assert variants[0].name == "workflow5@d=0.05,t=0.5"
    assert variants[0].stages[0].change_points.distance_km_threshold == 0.05


def test_window_expansion_only_touches_oscillation_workflows():
    names = [s.name for s in expand_osc_windows([get_preset("workflow1"), get_preset("workflow2")])]
    assert names == ["workflow1", "workflow2@w=0.166667", "workflow2@w=5", "workflow2@w=11"]


# scaling

def test_linear_fit():
    slope, intercept, r2 = linear_fit([1, 2, 3], [2, 4, 6])
    assert slope == pytest.approx(2.0)
    assert intercept == pytest.approx(0.0, abs=1e-9)
    assert r2 == pytest.approx(1.0)
    assert linear_fit([1, 2, 3], [5, 5, 5])[2] is None


def test_scaling_needs_three_sizes(dwell_pair_records):
    with pytest.raises(UsageError):
        scaling_probe(get_preset("workflow5"), [1000], {"d1": dwell_pair_records})


def test_scaling_empty_corpus_is_degenerate():
    report = scaling_probe(get_preset("workflow5"), [1000, 2000, 4000], {})
    assert report.degenerate
    assert report.r2 is None
    assert [p.size_bytes for p in report.points] == [0, 0, 0]
