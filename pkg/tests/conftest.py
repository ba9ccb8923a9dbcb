import numpy as np
import pytest

from assetfail.asset_data import FeatureSchema, FeatureSpec

TABLE_I_CSV = """AssetID,H1n,H2n,H3n,H1c,Age,Status
0001,26,1.38,198,Medium,28,Working
0002,37,0.78,183,Medium,35,Failed
0003,36,0.60,217,Severe,21,Failed
0004,46,1.51,196,Moderate,42,Working
0005,12,2.44,235,Moderate,39,Working
"""

TABLE_II_CSV = """AssetID,InspectionYear,H1n,H2n,H3n,H1c,Age,Status
0001,2018,26,1.38,198,Medium,28,Working
0001,2015,20,1.43,197,Medium,25,Working
0001,2012,15,1.42,201,High,22,Working
0002,2018,37,0.78,183,Medium,35,Failed
0002,2015,32,1.55,183,Medium,32,Working
0002,2012,22,1.69,186,Medium,29,Working
"""


def table_schema(levels=("Moderate", "Medium", "Severe")):
    return FeatureSchema((
        FeatureSpec("H1n"), FeatureSpec("H2n"), FeatureSpec("H3n"),
        FeatureSpec("H1c", "ordered-categorical", tuple(levels)),
    ))


@pytest.fixture
def schema_i():
    return table_schema()


@pytest.fixture
def schema_ii():
    return table_schema(("Moderate", "Medium", "High", "Severe"))


@pytest.fixture
def table_i(tmp_path):
    path = tmp_path / "table_i.csv"
    path.write_text(TABLE_I_CSV)
    return path


@pytest.fixture
def table_ii(tmp_path):
    path = tmp_path / "table_ii.csv"
    path.write_text(TABLE_II_CSV)
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# (TP, FN, FP, TN) and the printed Failed / Working / Average rows (P, R, F1).
PAPER_TABLES = {
    "IV-V": ((45, 6, 5, 144), ((0.90, 0.88, 0.89), (0.96, 0.97, 0.96), (0.93, 0.92, 0.93))),
    "VI-VII": ((41, 15, 11, 133), ((0.79, 0.73, 0.76), (0.90, 0.92, 0.91), (0.84, 0.83, 0.84))),
    "VIII-IX": ((47, 9, 9, 135), ((0.84, 0.84, 0.84), (0.94, 0.94, 0.94), (0.89, 0.89, 0.89))),
    "X-XI": ((44, 12, 25, 119), ((0.64, 0.79, 0.70), (0.91, 0.83, 0.87), (0.77, 0.81, 0.78))),
}


def small_fleet(seed=0, n_assets=200, name="default"):
    from dataclasses import replace

    from assetfail.evaluation import bundled_config, generate_fleet
    return generate_fleet(replace(bundled_config(name), n_assets=n_assets, seed=seed))
