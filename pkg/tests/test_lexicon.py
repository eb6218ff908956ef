import copy
import json

import pytest

from mathsem.errors import PlaceholderError, SchemaError
from mathsem.lexicon import (
    Signature,
    bundled_lexicon_path,
    check_placeholders,
    load_lexicon,
    lookup,
    parse_lexicon,
)

MINIMAL = {
    "version": 1,
    "reserved": {"maple": ["gamma"]},
    "entries": [
        {
            "key": "\\Foo",
            "kind": "semantic-macro",
            "senses": [{
                "id": "x:Foo", "role": "function", "signature": {"params": 1, "args": 1},
                "translations": {"maple": "Foo($p0, $a0)", "mathematica": "Foo[$p0,$a0]"},
            }],
        },
        {
            "key": "q",
            "kind": "symbol",
            "senses": [
                {"id": "var:q", "role": "variable", "prior": 0.7},
                {"id": "const:q", "role": "constant", "prior": 0.3,
                 "translations": {"maple": {"template": "q0", "reserved-collisions": ["q0"]}}},
            ],
        },
    ],
}


def mutated(path, value):
    data = copy.deepcopy(MINIMAL)
    target = data
    for key in path[:-1]:
        target = target[key]
    target[path[-1]] = value
    return data


def test_minimal_loads():
    lex = parse_lexicon(MINIMAL)
    assert len(lex) == 2
    assert [s.id for s in lookup(lex, "q")] == ["var:q", "const:q"]
    assert lex.macro_signatures() == {"Foo": (1, 1)}
    assert lex.reserved_for("maple") == {"gamma"}
    assert lex.sense("q", "const:q").translations["maple"].reserved_collisions == ("q0",)


def test_missing_key_is_none():
    assert lookup(parse_lexicon(MINIMAL), "zz") is None


def test_default_prior():
    assert parse_lexicon(MINIMAL).sense("\\Foo", "x:Foo").prior == 0.5


@pytest.mark.parametrize("path,value,pointer", [
    (("entries", 0, "kind"), "macro", "/entries/0/kind"),
    (("entries", 0, "key"), "Foo", "/entries/0/key"),
    (("entries", 1, "senses"), [], "/entries/1/senses"),
    (("entries", 1, "senses", 0, "role"), "noun", "/entries/1/senses/0/role"),
    (("entries", 1, "senses", 0, "id"), "plain", "/entries/1/senses/0/id"),
    (("entries", 1, "senses", 0, "prior"), 1.5, "/entries/1/senses/0/prior"),
    (("entries", 1, "senses", 1, "id"), "var:q", "/entries/1/senses"),
    (("entries", 0, "senses", 0, "translations"), {"maple": "Foo($a0)"}, "/entries/0/senses/0/translations"),
    (("entries", 0, "senses", 0, "signature"), {"params": -1}, "/entries/0/senses/0/signature/params"),
    (("entries", 0, "senses", 0, "signature"), {"arity": 1}, "/entries/0/senses/0/signature"),
    (("reserved", "maxima"), [], "/reserved/maxima"),
    (("entries", 1, "senses", 0, "translations"), {"maxima": "q"}, "/entries/1/senses/0/translations/maxima"),
])
def test_schema_errors_carry_pointer(path, value, pointer):
    with pytest.raises(SchemaError) as info:
        parse_lexicon(mutated(path, value))
    assert info.value.pointer == pointer


def test_duplicate_key():
    data = copy.deepcopy(MINIMAL)
    data["entries"].append(copy.deepcopy(data["entries"][1]))
    with pytest.raises(SchemaError):
        parse_lexicon(data)


@pytest.mark.parametrize("template", ["Foo($p1, $a0)", "Foo($p0, $a1)", "Foo($x0)", "Foo($)"])
def test_bad_placeholders(template):
    with pytest.raises(PlaceholderError):
        check_placeholders("x:Foo", template, Signature(params=1, args=1))


def test_bundled_lexicon_round_trips(tmp_path, lexicon):
    out = tmp_path / "copy.json"
    lexicon.save(out)
    assert load_lexicon(out).to_dict() == lexicon.to_dict()


def test_bundled_lexicon_has_required_senses(lexicon):
    for key, sid in [("\\JacobiP", "dlmf:JacobiP"), ("P", "dlmf:JacobiP"), ("P", "dlmf:LegendreP"),
                     ("\\gamma", "const:EulerMascheroni"), ("e", "const:EulerNumber"), ("\\Gamma", "func:Gamma")]:
        assert lexicon.sense(key, sid) is not None, (key, sid)


def test_invalid_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    with pytest.raises(SchemaError):
        load_lexicon(bad)


def test_missing_file_is_oserror(tmp_path):
    with pytest.raises(OSError):
        load_lexicon(tmp_path / "absent.json")


def test_bundled_file_is_valid_json():
    json.loads(bundled_lexicon_path().read_text(encoding="utf-8"))
