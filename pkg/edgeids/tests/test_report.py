import pandas as pd
import pytest

from edgeids.app.core.config import get_settings
from edgeids.app.core.errors import NothingToReportError
from edgeids.app.core.run_config import RunConfig
from edgeids.app.data.labels import Target
from edgeids.app.evaluation.metrics import evaluate
from edgeids.app.services.fixtures import ALGORITHM_FIXTURE, PLATFORM_FIXTURE, DESIGNS_FIXTURE
from edgeids.app.services.pipeline import PipelineService
from edgeids.app.services.report import FLEXIBILITY_NOTES, REPORT_FILE, ReportBundle, render_report


@pytest.fixture(scope="module")
def evaluations(trained_heads, split):
    _, holdout = split
    return [evaluate(model, holdout, target) for target, model in trained_heads.items()]


def test_empty_bundle_has_nothing_to_report(tmp_path):
    with pytest.raises(NothingToReportError):
        render_report(ReportBundle())
    with pytest.raises(NothingToReportError):
        render_report(ReportBundle.from_run_dir(tmp_path))


def test_evaluation_only_report(evaluations):
    report = render_report(ReportBundle(evaluations=evaluations))
    assert [t.name for t in report.tables] == ["metrics", "published_algorithms", "flexibility"]
    assert "MLP-subcategory" in report.markdown
    assert FLEXIBILITY_NOTES in report.markdown
    assert "Generated:" not in report.markdown
    metrics = report.tables[0]
    assert [row[1] for row in metrics.rows] == ["attack", "category", "subcategory"]


def test_csv_cells_match_markdown(evaluations, tmp_path):
    report = render_report(ReportBundle(evaluations=evaluations, generated_at="2024-01-01T00:00:00Z"))
    paths = report.write(tmp_path)
    assert paths[0] == tmp_path / REPORT_FILE
    markdown = (tmp_path / REPORT_FILE).read_text(encoding="utf-8")
    assert "Generated: 2024-01-01T00:00:00Z" in markdown

    for table in report.tables:
        frame = pd.read_csv(tmp_path / f"report_{table.name}.csv", dtype=str, keep_default_na=False)
        assert list(frame.columns) == table.columns
        for row in frame.values.tolist():
            assert "| " + " | ".join(row) + " |" in markdown


def test_cost_report_reproduces_published_tables(tmp_path):
    service = PipelineService(RunConfig(seed=1), tmp_path)
    service.cost()
    bundle = ReportBundle.from_run_dir(tmp_path, required_pps=1e6)
    report = render_report(bundle)
    names = [t.name for t in report.tables]
    assert names == ["throughput", "published_platforms", "resources", "published_designs", "recommendation", "flexibility"]
    report.write(tmp_path)

    fixtures = get_settings().FIXTURE_DIR
    for name, fixture in (("published_platforms", PLATFORM_FIXTURE), ("published_designs", DESIGNS_FIXTURE)):
        assert (tmp_path / f"report_{name}.csv").read_bytes() == (fixtures / fixture).read_bytes()

    resources = {t.name: t for t in report.tables}["resources"]
    attack = resources.rows[0]
    assert attack[:4] == ["attack", "4", "46588", "3680"]
    assert attack[-2:] == ["47514", "20.6"]

    recommendation = {t.name: t for t in report.tables}["recommendation"]
    assert recommendation.rows == [["published", "1000000", "dataflow", "attack", "1166861", "265799"]]


def test_published_algorithms_reproduced(evaluations, tmp_path):
    render_report(ReportBundle(evaluations=evaluations)).write(tmp_path)
    fixture = get_settings().FIXTURE_DIR / ALGORITHM_FIXTURE
    assert (tmp_path / "report_published_algorithms.csv").read_bytes() == fixture.read_bytes()


def test_recommendation_without_a_fast_enough_platform(tmp_path):
    PipelineService(RunConfig(seed=1), tmp_path).cost()
    report = render_report(ReportBundle.from_run_dir(tmp_path, required_pps=5e6))
    recommendation = {t.name: t for t in report.tables}["recommendation"]
    assert recommendation.rows[0][2:4] == ["none", "-"]


def test_selection_section(tmp_path, evaluations):
    service = PipelineService(RunConfig(seed=1), tmp_path)
    service.select(use_fixture=True)
    bundle = ReportBundle.from_run_dir(tmp_path)
    assert set(bundle.selection) == set(Target)
    report = render_report(bundle.model_copy(update={"evaluations": evaluations}))
    selection = {t.name: t for t in report.tables}["selection"]
    assert selection.rows[0] == ["attack", "1", "MLP", "kept"]
    assert ["attack", "-", "NB", "eliminated"] in selection.rows
