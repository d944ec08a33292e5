import json
from functools import lru_cache
from importlib import resources


def asset_text(name):
    return resources.files("qmdgen").joinpath("assets", name).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def asset_json(name):
    return json.loads(asset_text(name))


def gate_alias_table():
    return asset_json("gate_aliases.json")


def stereotype_alias_table():
    return dict(asset_json("stereotype_aliases.json")["aliases"])
