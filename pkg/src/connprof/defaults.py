"""Loaders for the packaged starter configuration."""

from __future__ import annotations

import json
from importlib import resources

from .dialog import DialogTree, dialog_tree_from_json
from .model import ConjunctInventory, inventory_from_json


def _load(name: str) -> dict:
    with resources.files("connprof.data").joinpath(name).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def default_inventory_json() -> dict:
    return _load("default_inventory.json")


def default_dialog_json() -> dict:
    return _load("default_dialog.json")


def default_inventory() -> ConjunctInventory:
    return inventory_from_json(default_inventory_json())


def default_dialog_tree() -> DialogTree:
    return dialog_tree_from_json(default_dialog_json())
