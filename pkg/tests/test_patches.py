import pytest
from hypothesis import given, settings, strategies as st

from reinflect import glyphs, patches
from reinflect.corpus import extract_alphabet, InflectionSample
from reinflect.patches import (
    BaseMap,
    EMPTY_TABLE,
    PatchError,
    PatchTable,
    build_classes,
    build_table,
    diff,
    filter_for_alphabet,
    find_patch,
    is_candidate,
    parse_table,
    prepopulate,
    serialize_table,
)


@pytest.fixture(scope="module")
def rendered(render_config):
    chars = set("abcdefghijklmnopqrstuvwxyzáàâäãåéèêëíìîïóòôöõúùûüñçøxm")
    return glyphs.render_alphabet(chars, render_config)


class TestDiff:
    def test_self_diff_zero(self, rendered):
        d = diff(rendered.bitmaps["a"], rendered.bitmaps["a"])
        assert d.weight == 0

    def test_symmetric(self, rendered):
        ab = diff(rendered.bitmaps["a"], rendered.bitmaps["b"])
        ba = diff(rendered.bitmaps["b"], rendered.bitmaps["a"])
        assert ab.xor_bits == ba.xor_bits

    def test_black_vs_white(self):
        black = glyphs.GlyphBitmap("x", 4, 4, bytes([1]) * 16)
        white = glyphs.GlyphBitmap("y", 4, 4, bytes(16))
        assert diff(black, white).weight == 16

    def test_dimension_mismatch(self):
        a = glyphs.GlyphBitmap("x", 4, 4, bytes(16))
        b = glyphs.GlyphBitmap("y", 2, 2, bytes(4))
        with pytest.raises(PatchError):
            diff(a, b)


class TestBaseMap:
    def test_decomposition(self):
        base = BaseMap()
        assert base("ä") == "a"
        assert base("é") == "e"
        assert base("ñ") == "n"

    def test_confusables(self):
        base = BaseMap()
        assert base("ø") == "o"
        assert base("ı") == "i"
        assert base("đ") == "d"
        assert base("ł") == "l"

    def test_idempotent(self):
        base = BaseMap()
        for char in "aäéøñxıł":
            assert base(base(char)) == base(char)

    def test_user_override_wins(self):
        base = BaseMap({"œ": "o"})
        assert base("œ") == "o"

    def test_override_file_round_trip(self):
        text = "# comment\nœ\to\nƣ\tq\n"
        overrides = patches.parse_base_overrides(text)
        assert overrides == {"œ": "o", "ƣ": "q"}
        base = BaseMap(overrides)
        assert base("ƣ") == "q"

    def test_override_file_bad_line(self):
        with pytest.raises(PatchError, match="line 1"):
            patches.parse_base_overrides("œ o\n")


class TestIsCandidate:
    def test_accent_pair_accepted(self, rendered):
        base = BaseMap()
        d = diff(rendered.bitmaps["o"], rendered.bitmaps["ô"])
        assert is_candidate(rendered.bitmaps["o"], rendered.bitmaps["ô"], d, base)

    def test_x_m_discarded(self, rendered):
        base = BaseMap()
        d = diff(rendered.bitmaps["x"], rendered.bitmaps["m"])
        assert not is_candidate(rendered.bitmaps["x"], rendered.bitmaps["m"], d, base)

    def test_self_pair_discarded(self, rendered):
        base = BaseMap()
        d = diff(rendered.bitmaps["a"], rendered.bitmaps["a"])
        assert not is_candidate(rendered.bitmaps["a"], rendered.bitmaps["a"], d, base)

    def test_zero_weight_discarded(self, render_config):
        # i and dotless i render identically, so their diff is empty
        rendered = glyphs.render_alphabet({"i", "ı"}, render_config)
        d = diff(rendered.bitmaps["i"], rendered.bitmaps["ı"])
        assert d.weight == 0
        assert not is_candidate(
            rendered.bitmaps["i"], rendered.bitmaps["ı"], d, BaseMap()
        )


class TestBuildClasses:
    def test_identical_diffs_share_class(self, rendered):
        da = diff(rendered.bitmaps["a"], rendered.bitmaps["á"])
        de = diff(rendered.bitmaps["e"], rendered.bitmaps["é"])
        assert da.xor_bits == de.xor_bits
        classes = build_classes([("a", "á", da), ("e", "é", de)])
        assert len(classes) == 1
        assert set(classes[0]) == {("a", "á"), ("e", "é")}

    def test_acute_and_diaeresis_distinct(self, rendered):
        da = diff(rendered.bitmaps["a"], rendered.bitmaps["á"])
        du = diff(rendered.bitmaps["a"], rendered.bitmaps["ä"])
        assert da.xor_bits != du.xor_bits
        classes = build_classes([("a", "á", da), ("a", "ä", du)])
        assert len(classes) == 2

    def test_empty_input(self):
        assert build_classes([]) == []

    def test_deterministic_ids(self, rendered):
        da = diff(rendered.bitmaps["a"], rendered.bitmaps["á"])
        du = diff(rendered.bitmaps["a"], rendered.bitmaps["ä"])
        c1 = build_classes([("a", "á", da), ("a", "ä", du)])
        c2 = build_classes([("a", "ä", du), ("a", "á", da)])
        assert c1 == c2


class TestBuildTable:
    def test_symmetric_entries(self):
        table = build_table([[("a", "á")]])
        assert table.entries[("a", 0)] == "á"
        assert table.entries[("á", 0)] == "a"

    def test_conflict_detected(self):
        with pytest.raises(PatchError, match="conflicting"):
            build_table([[("a", "b"), ("a", "c")]])

    def test_table5_shape(self, rendered):
        de = diff(rendered.bitmaps["e"], rendered.bitmaps["è"])
        da = diff(rendered.bitmaps["a"], rendered.bitmaps["à"])
        table = build_table(build_classes([("e", "è", de), ("a", "à", da)]))
        k = find_patch(table, "e", "è")
        assert k is not None
        assert find_patch(table, "a", "à") == k


class TestApplyFindPatch:
    def test_apply_twice_is_identity(self, latin_table):
        for (symbol, patch_id), result in latin_table.entries.items():
            assert patches.apply(latin_table, result, patch_id) == symbol

    def test_apply_undefined_is_none(self, latin_table):
        acute = find_patch(latin_table, "a", "á")
        assert patches.apply(latin_table, "b", acute) is None

    def test_find_patch_absent(self, latin_table):
        assert find_patch(latin_table, "a", "b") is None

    def test_find_patch_symmetric(self, latin_table):
        assert find_patch(latin_table, "á", "a") == find_patch(latin_table, "a", "á")

    def test_e_and_a_grave_share_id(self, latin_table):
        assert find_patch(latin_table, "e", "è") == find_patch(latin_table, "a", "à")

    def test_o_stroke_has_own_id(self, latin_table):
        stroke = find_patch(latin_table, "o", "ø")
        assert stroke is not None
        assert stroke != find_patch(latin_table, "o", "ò")


class TestPrepopulate:
    def test_basic_latin_has_no_classes(self, render_config):
        table = prepopulate([(0x0021, 0x007E)], render_config)
        assert table.class_count == 0

    def test_latin1_contains_diaeresis_class(self, latin_table):
        assert find_patch(latin_table, "a", "ä") is not None

    def test_empty_ranges(self, render_config):
        assert prepopulate([], render_config).class_count == 0

    def test_cached(self, render_config):
        t1 = prepopulate([(0x0041, 0x005A)], render_config)
        t2 = prepopulate([(0x0041, 0x005A)], render_config)
        assert t1 is t2

    def test_placeholders_never_in_table(self, render_config):
        # A840-A87F (Phags-pa) is not covered by the DejaVu fonts
        table = prepopulate([(0x0061, 0x007A), (0xA840, 0xA87F)], render_config)
        rendered = glyphs.render_alphabet(
            {chr(c) for c in range(0xA840, 0xA880)}, render_config
        )
        assert rendered.placeholders
        for symbol, _ in table.entries:
            assert symbol not in rendered.placeholders


class TestFilterForAlphabet:
    def _alphabet(self, *words):
        samples = [InflectionSample(w, w, ("X",)) for w in words]
        return extract_alphabet(samples)

    def test_no_accents_empty_table(self, latin_table):
        filtered = filter_for_alphabet(latin_table, self._alphabet("abc"))
        assert len(filtered) == 0 and filtered.class_count == 0

    def test_whole_class_retained(self, latin_table):
        filtered = filter_for_alphabet(latin_table, self._alphabet("aä"))
        diaeresis = find_patch(filtered, "a", "ä")
        assert diaeresis is not None
        # rows outside the alphabet survive because the class was observed
        assert find_patch(filtered, "o", "ö") == diaeresis

    def test_idempotent(self, latin_table):
        alpha = self._alphabet("aäe", "éo")
        once = filter_for_alphabet(latin_table, alpha)
        twice = filter_for_alphabet(once, alpha)
        assert once == twice

    def test_monotone(self, latin_table):
        small = filter_for_alphabet(latin_table, self._alphabet("aä"))
        large = filter_for_alphabet(latin_table, self._alphabet("aäoöeé"))
        assert len(small) <= len(large)

    def test_empty_alphabet(self, latin_table):
        assert filter_for_alphabet(latin_table, []).class_count == 0

    @settings(max_examples=60, deadline=None)
    @given(chars=st.sets(st.sampled_from("aäáàeéèoöóøuüúincçx"), max_size=10))
    def test_filter_properties_hold_for_any_alphabet(self, latin_table, chars):
        filtered = filter_for_alphabet(latin_table, chars)
        # idempotent
        assert filter_for_alphabet(filtered, chars) == filtered
        # monotone: filtering never invents entries
        assert len(filtered) <= len(latin_table)
        # structural invariants survive the re-densification
        for (symbol, patch_id), result in filtered.entries.items():
            assert filtered.entries[(result, patch_id)] == symbol
            assert result != symbol
        ids = {patch_id for _, patch_id in filtered.entries}
        assert ids == set(range(filtered.class_count))
        # every surviving class really was observed inside the alphabet
        for k in range(filtered.class_count):
            assert any(
                s in chars and r in chars
                for (s, kk), r in filtered.entries.items()
                if kk == k
            )


class TestSerialization:
    def test_round_trip(self, latin_table):
        assert parse_table(serialize_table(latin_table)) == latin_table

    def test_round_trip_full_ranges(self, full_table):
        assert len(full_table) > 1000
        assert parse_table(serialize_table(full_table)) == full_table

    def test_round_trip_empty(self):
        assert parse_table(serialize_table(EMPTY_TABLE)) == EMPTY_TABLE

    def test_column_order(self, rendered):
        da = diff(rendered.bitmaps["a"], rendered.bitmaps["á"])
        table = build_table(build_classes([("a", "á", da)]))
        lines = serialize_table(table).splitlines()
        assert lines[0] == "a\t0\tá"
        assert lines[1] == "á\t0\ta"

    def test_asymmetric_input_rejected(self):
        with pytest.raises(PatchError):
            parse_table("a\t0\tá\n")

    def test_bad_id_rejected(self):
        with pytest.raises(PatchError):
            parse_table("a\tx\tá\n")


class TestTableInvariants:
    def test_symmetry_and_irreflexivity(self, full_table):
        for (symbol, patch_id), result in full_table.entries.items():
            assert result != symbol
            assert full_table.entries[(result, patch_id)] == symbol

    def test_ids_dense(self, full_table):
        ids = {patch_id for _, patch_id in full_table.entries}
        assert ids == set(range(full_table.class_count))

    def test_self_map_rejected(self):
        with pytest.raises(PatchError):
            PatchTable({("a", 0): "a"}, 1)
