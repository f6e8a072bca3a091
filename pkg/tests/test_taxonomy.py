import json

import pytest

from outfitcomplete.taxonomy import (TaxonomyError, TermClass, build_taxonomy,
                                     canonicalize, load_taxonomy, save_taxonomy)


def write_taxonomy(tmp_path, **overrides):
    data = {"apparel": ["dress", "jeans"], "colors": ["red"],
            "patterns": ["floral"], "synonyms": {}}
    data.update(overrides)
    path = tmp_path / "tax.json"
    path.write_text(json.dumps(data))
    return path


def test_load_counts(tmp_path):
    tax = load_taxonomy(write_taxonomy(tmp_path))
    assert len(tax.apparel_terms) == 2
    assert len(tax.color_terms) == 1
    assert len(tax.pattern_terms) == 1


def test_synonym_lookup(tmp_path):
    tax = load_taxonomy(write_taxonomy(tmp_path, synonyms={"denims": "jeans"}))
    assert tax.lookup("denims") == (TermClass.APPAREL, "jeans")


def test_conflicting_classes_rejected(tmp_path):
    path = write_taxonomy(tmp_path, colors=["red"], patterns=["red"])
    with pytest.raises(TaxonomyError, match="red"):
        load_taxonomy(path)


def test_malformed_file_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"apparel": [\n  broken\n]}')
    with pytest.raises(TaxonomyError, match="line"):
        load_taxonomy(path)


def test_lookup_two_gram_pattern(taxonomy):
    assert taxonomy.lookup("polka dot") == (TermClass.PATTERN, "polka dot")


def test_lookup_absent_term(taxonomy):
    assert taxonomy.lookup("xyzzy") == (TermClass.NONE, None)


def test_lookup_normalizes_case_and_whitespace(taxonomy):
    assert taxonomy.lookup("  JEANS ") == (TermClass.APPAREL, "jeans")


def test_lookup_rejects_long_ngrams(taxonomy):
    with pytest.raises(ValueError):
        taxonomy.lookup("one two three four")


def test_every_term_classifies_to_its_set(taxonomy):
    for term in taxonomy.apparel_terms:
        assert taxonomy.lookup(term)[0] is TermClass.APPAREL
    for term in taxonomy.color_terms:
        assert taxonomy.lookup(term)[0] is TermClass.COLOR
    for term in taxonomy.pattern_terms:
        assert taxonomy.lookup(term)[0] is TermClass.PATTERN


def test_roundtrip(taxonomy, tmp_path):
    path = tmp_path / "roundtrip.json"
    save_taxonomy(taxonomy, path)
    again = load_taxonomy(path)
    assert again == taxonomy
    save_taxonomy(again, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


def test_synonym_target_must_exist():
    with pytest.raises(TaxonomyError):
        build_taxonomy(["dress"], [], [], {"gown": "missing"})


def test_canonicalize():
    assert canonicalize("  Polka   DOT ") == "polka dot"
