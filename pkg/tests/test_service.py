import numpy as np
import pytest
from fastapi.testclient import TestClient

from paramsens.service import create_app


@pytest.fixture(scope="module")
def client(small_study):
    return TestClient(create_app(small_study))


@pytest.fixture(scope="module")
def first_id(small_study):
    return int(small_study.sample_ids[0])


class TestStudyEndpoint:
    def test_schema_and_contents(self, client, small_study):
        payload = client.get("/study").json()
        assert payload["schema"] == "paramsens/study@1"
        assert [p["name"] for p in payload["parameters"]] == ["param1", "param2"]
        assert payload["sampling"]["stars"] == 2
        assert len(payload["samples"]) == len(small_study.plan.samples)
        ok = [s for s in payload["samples"] if s["status"] == "ok"]
        assert len(ok) == len(small_study.sample_ids)


class TestMatrixEndpoint:
    def test_shape_and_normalization(self, client):
        payload = client.get("/matrix").json()
        values = np.array(payload["values"])
        assert values.shape == (2, 7)
        nonzero = np.array(payload["raw"]).max(axis=0) > 0
        assert np.allclose(values.max(axis=0)[nonzero], 1.0)
        assert payload["default_axes"] == payload["parameters"][:2]


class TestInfluenceEndpoint:
    def test_payload(self, client, first_id):
        payload = client.get(
            f"/influence?param=param2&char=Diameter&selected={first_id}"
        ).json()
        assert payload["schema"] == "paramsens/influence@1"
        assert len(payload["average_histogram"]) == 20
        assert len(payload["bin_edges"]) == 21
        assert len(payload["regional"]["bin_centers"]) == 10
        assert payload["global"] is not None
        assert payload["markers"][0]["sample_id"] == first_id
        assert isinstance(payload["markers"][0]["siblings"], list)

    def test_absent_bins_are_null_not_zero(self, client):
        payload = client.get("/influence?param=param1&char=StraightLength").json()
        means = payload["regional"]["means"]
        counts = payload["regional"]["counts"]
        for m, c in zip(means, counts):
            if c == 0:
                assert m is None

    def test_unknown_param_404(self, client):
        assert client.get("/influence?param=nope&char=Diameter").status_code == 404

    def test_missing_query_400(self, client):
        assert client.get("/influence").status_code == 400


class TestMdsEndpoint:
    def test_one_coordinate_per_ok_result(self, client, small_study):
        payload = client.get("/mds").json()
        assert len(payload["coordinates"]) == len(small_study.sample_ids)
        assert payload["stress"] >= 0.0


class TestStarsEndpoint:
    def test_segments_for_selected_star(self, client, small_study, first_id):
        payload = client.get(f"/stars?selected={first_id}").json()
        star = next(s for s in small_study.plan.samples if s.sample_id == first_id).star_id
        assert payload["stars"] == [star]
        assert payload["segments"]
        assert all(seg["star_id"] == star for seg in payload["segments"])
        assert payload["reference"]["mode"] == "selected"
        assert payload["reference"]["reference_id"] == first_id
        assert payload["dissimilarity"][str(first_id)] == 0.0

    def test_no_selection_no_lines(self, client):
        payload = client.get("/stars").json()
        assert payload["segments"] == []
        assert payload["reference"]["mode"] == "center"

    def test_unknown_selection_404(self, client):
        assert client.get("/stars?selected=99999").status_code == 404


class TestSpatialEndpoints:
    def test_slice_shape(self, client, small_study):
        payload = client.get("/spatial?slice=z,5").json()
        nx, ny, _ = small_study.volume.geometry.dims
        values = np.array(payload["values"], dtype=float)
        assert values.shape == (nx, ny)
        assert payload["in_plane_axes"] == ["x", "y"]

    def test_result_mask_binary(self, client, first_id):
        payload = client.get(f"/spatial/result/{first_id}?slice=z,5").json()
        values = np.array(payload["values"])
        assert set(np.unique(values)) <= {0, 1}

    def test_malformed_slice_400(self, client):
        assert client.get("/spatial?slice=w,1").status_code == 400
        assert client.get("/spatial?slice=z").status_code == 400

    def test_out_of_range_404(self, client):
        assert client.get("/spatial?slice=z,999").status_code == 404


class TestFibersEndpoint:
    def test_payload(self, client, small_study, first_id):
        payload = client.get(f"/fibers/{first_id}").json()
        result = small_study.load_result(first_id)
        assert len(payload["fibers"]) == len(result.fibers)
        f = payload["fibers"][0]
        assert set(f) == {"fiber_id", "radius", "vertices", "characteristics"}
        assert "StraightLength" in f["characteristics"]

    def test_unknown_404(self, client):
        assert client.get("/fibers/424242").status_code == 404


class TestDiffEndpoint:
    def test_self_diff_empty_point_sets(self, client, first_id):
        payload = client.get(f"/diff?ref={first_id}&other={first_id}&fibers=1").json()
        panel = payload["panels"][0]
        assert panel["match_id"] == 1
        assert panel["dissimilarity"] == 0.0
        assert panel["ref_only"] == [] and panel["other_only"] == []

    def test_cross_diff_has_exclusive_points(self, client, small_study):
        a, b = (int(s) for s in small_study.sample_ids[[0, -1]])
        payload = client.get(f"/diff?ref={a}&other={b}&fibers=0,1").json()
        assert len(payload["panels"]) == 2
        for panel in payload["panels"]:
            if panel["match_id"] is None:
                assert panel["dissimilarity"] == 1.0
            else:
                assert 0.0 <= panel["dissimilarity"] <= 1.0

    def test_unknown_fiber_404(self, client, first_id):
        code = client.get(f"/diff?ref={first_id}&other={first_id}&fibers=999").status_code
        assert code == 404

    def test_missing_params_400(self, client, first_id):
        assert client.get("/diff").status_code == 400
        assert client.get(f"/diff?ref={first_id}&other={first_id}").status_code == 400


class TestReadOnly:
    def test_no_mutating_routes(self, client):
        for route in client.app.routes:
            methods = getattr(route, "methods", set()) or set()
            assert methods <= {"GET", "HEAD"}, route.path
