import numpy as np
import pytest

from urbanmorph.errors import HeaderMismatch, ParseError
from urbanmorph.raster import (
    HeightRaster,
    fill_nodata_nearest,
    load_ascii_grid,
    resample_bilinear,
    sample_bilinear,
    write_ascii_grid,
)


def grid_text(ncols, nrows, values, xll=0.0, yll=0.0, cs=1.0, nodata=-9999):
    head = (f"ncols {ncols}\nnrows {nrows}\nxllcorner {xll}\nyllcorner {yll}\n"
            f"cellsize {cs}\nNODATA_value {nodata}\n")
    return head + "\n".join(" ".join(str(v) for v in row) for row in values)


class TestAsciiGrid:
    def test_parse_2x2(self, tmp_path):
        p = tmp_path / "g.asc"
        p.write_text(grid_text(2, 2, [[1, 2], [3, 4]]))
        r = load_ascii_grid(p)
        # top row first per the format
        assert r.values.tolist() == [[1.0, 2.0], [3.0, 4.0]]
        assert r.nrows == 2 and r.ncols == 2
        assert r.bbox() == (0.0, 0.0, 2.0, 2.0)

    def test_all_nodata_flagged_void(self, tmp_path):
        p = tmp_path / "g.asc"
        p.write_text(grid_text(2, 2, [[-9999, -9999], [-9999, -9999]]))
        r = load_ascii_grid(p)
        assert r.is_fully_void()

    def test_truncated_values(self, tmp_path):
        p = tmp_path / "g.asc"
        p.write_text(grid_text(3, 3, [[1, 2, 3], [4, 5, 6]]))
        with pytest.raises(HeaderMismatch):
            load_ascii_grid(p)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "g.asc"
        p.write_text("ncols 2\nwrongkey 2\n1 2 3 4")
        with pytest.raises(ParseError):
            load_ascii_grid(p)

    def test_roundtrip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(1)
        vals = rng.uniform(-500, 4000, (7, 5))
        vals[2, 3] = -9999.0
        r = HeightRaster(origin_x=412345.25, origin_y=6170000.125, cell_size=90.0,
                         values=vals, nodata=-9999.0)
        p = tmp_path / "g.asc"
        write_ascii_grid(r, p)
        r2 = load_ascii_grid(p)
        assert np.array_equal(r.values, r2.values)
        assert r2.origin_x == r.origin_x and r2.origin_y == r.origin_y
        assert r2.cell_size == r.cell_size and r2.nodata == r.nodata


class TestBilinear:
    def test_constant_preserved(self):
        r = HeightRaster(0, 0, 10.0, np.full((4, 4), 7.0))
        out = resample_bilinear(r, 2.5)
        assert np.all(out.values == 7.0)
        assert out.values.shape == (16, 16)

    def test_linear_ramp_preserved(self):
        xs = np.arange(6) * 10.0 + 5.0
        vals = np.tile(xs, (4, 1))  # z = x at cell centers
        r = HeightRaster(0, 0, 10.0, vals)
        out = resample_bilinear(r, 2.0)
        ox, oy = out.cell_centers()
        expect = np.tile(ox, (out.nrows, 1))
        assert np.allclose(out.values, expect, atol=1e-9)

    def test_2x2_center_value(self):
        # corners 0,0,0,4: value at the center of the block is the mean
        r = HeightRaster(0, 0, 1.0, np.array([[0.0, 0.0], [0.0, 4.0]]))
        assert sample_bilinear(r, 1.0, 1.0) == pytest.approx(1.0)

    def test_identity_at_source_resolution(self):
        rng = np.random.default_rng(2)
        vals = rng.uniform(0, 100, (5, 8))
        vals[1, 1] = -9999.0
        r = HeightRaster(100.0, 200.0, 30.0, vals, nodata=-9999.0)
        out = resample_bilinear(r, 30.0)
        valid = vals != -9999.0
        assert np.array_equal(out.values[valid], vals[valid])

    def test_nodata_poisons_support(self):
        vals = np.array([[1.0, -9999.0], [1.0, 1.0]])
        r = HeightRaster(0, 0, 1.0, vals, nodata=-9999.0)
        assert np.isnan(sample_bilinear(r, 1.0, 1.0))
        # zero-weight nodata must not poison
        assert sample_bilinear(r, 0.5, 0.5) == 1.0


class TestMeanInRect:
    def test_constant(self):
        r = HeightRaster(0, 0, 10.0, np.full((4, 4), 150.0))
        assert r.mean_in_rect((0, 0, 40, 40)) == 150.0

    def test_two_cells(self):
        r = HeightRaster(0, 0, 10.0, np.array([[100.0, 200.0]]))
        assert r.mean_in_rect((0, 0, 20, 10)) == 150.0

    def test_fully_nodata_sentinel(self):
        r = HeightRaster(0, 0, 10.0, np.full((2, 2), -9999.0), nodata=-9999.0)
        assert r.mean_in_rect((0, 0, 20, 20)) is None

    def test_within_min_max(self):
        rng = np.random.default_rng(3)
        vals = rng.uniform(100, 300, (10, 10))
        r = HeightRaster(0, 0, 5.0, vals)
        m = r.mean_in_rect((10, 10, 35, 40))
        assert vals.min() <= m <= vals.max()


class TestFillNodata:
    def test_holes_filled_from_nearest(self):
        vals = np.array([[1.0, 1.0, 1.0],
                         [1.0, -9999.0, 5.0],
                         [5.0, 5.0, 5.0]])
        r = HeightRaster(0, 0, 1.0, vals, nodata=-9999.0)
        f = fill_nodata_nearest(r)
        assert f.values[1, 1] in (1.0, 5.0)
        assert (f.values != -9999.0).all()

    def test_valid_cells_untouched(self):
        rng = np.random.default_rng(4)
        vals = rng.uniform(0, 10, (6, 6))
        vals[[1, 4], [2, 5]] = -9999.0
        r = HeightRaster(0, 0, 1.0, vals, nodata=-9999.0)
        f = fill_nodata_nearest(r)
        valid = vals != -9999.0
        assert np.array_equal(f.values[valid], vals[valid])

    def test_all_void_unchanged(self):
        r = HeightRaster(0, 0, 1.0, np.full((3, 3), -9999.0), nodata=-9999.0)
        assert fill_nodata_nearest(r).is_fully_void()
