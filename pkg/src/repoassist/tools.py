"""The repository tool layer: tool specs, argument validation, and the four
tools every session must expose (class path lookup, file retrieval with
header cleanup, method enumeration, one-shot inventory loading)."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import jsonschema

from . import javaparse
from .errors import (
    JavaParseError,
    RepoError,
    ToolExecutionError,
    ToolNotFound,
    ToolValidationError,
)
from .repoaccess import RepoSnapshot

REQUIRED_TOOL_NAMES = (
    "find_class_path",
    "get_content_from_file",
    "get_methods",
    "load_battleship_json",
)


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    parameters: dict  # JSON schema for the argument object
    handler: Callable  # (session, arguments) -> str

    def to_wire(self) -> dict:
        return {
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": self.parameters,
            },
        }


@dataclass(frozen=True)
class ToolCall:
    call_id: str
    tool_name: str
    arguments: dict


class ToolRegistry:
    """Insertion-ordered tool specs with unique names."""

    def __init__(self):
        self._specs: dict[str, ToolSpec] = {}

    def register(self, spec: ToolSpec) -> None:
        if spec.name in self._specs:
            raise ValueError(f"duplicate tool name {spec.name!r}")
        self._specs[spec.name] = spec

    def get(self, name: str) -> ToolSpec:
        if name not in self._specs:
            raise ToolNotFound(name)
        return self._specs[name]

    def names(self) -> list[str]:
        return list(self._specs)

    def specs(self) -> list[ToolSpec]:
        return list(self._specs.values())

    def to_wire(self) -> list[dict]:
        return [spec.to_wire() for spec in self._specs.values()]

    def validate_arguments(self, call: ToolCall) -> None:
        spec = self.get(call.tool_name)
        try:
            jsonschema.validate(call.arguments, spec.parameters)
        except jsonschema.ValidationError as exc:
            raise ToolValidationError(
                f"arguments for {call.tool_name} invalid: {exc.message}"
            ) from exc


def _object_schema(properties: dict, required: list[str]) -> dict:
    return {
        "type": "object",
        "properties": properties,
        "required": required,
        "additionalProperties": False,
    }


def build_repo_tool_registry(repo: RepoSnapshot) -> ToolRegistry:
    """The default four-tool registry bound to one repository snapshot."""

    def find_class_path(session, arguments) -> str:
        name = arguments["class_name"]
        try:
            paths = repo.find_class_path(name)
        except (RepoError, ValueError) as exc:
            raise ToolExecutionError(f"find_class_path failed: {exc}") from exc
        return json.dumps({"class_name": name, "paths": paths})

    def get_content_from_file(session, arguments) -> str:
        path = arguments["path"]
        try:
            content = repo.fetch_file(path)
        except (RepoError, ValueError) as exc:
            raise ToolExecutionError(f"get_content_from_file failed: {exc}") from exc
        cleaned = javaparse.strip_header(content.text)
        return json.dumps({
            "path": content.path,
            "size_bytes": content.size_bytes,
            "sha256": content.sha256,
            "header_stripped": cleaned != content.text,
            "text": cleaned,
        })

    def get_methods(session, arguments) -> str:
        name = arguments["class_name"]
        try:
            paths = repo.find_class_path(name)
        except (RepoError, ValueError) as exc:
            raise ToolExecutionError(f"get_methods failed: {exc}") from exc
        if not paths:
            raise ToolExecutionError(f"no class named {name!r} in the repository")
        if len(paths) > 1:
            raise ToolExecutionError(
                f"class name {name!r} is ambiguous: {', '.join(paths)}; "
                "ask for the one you mean"
            )
        try:
            source = repo.fetch_file(paths[0]).text
            methods = javaparse.enumerate_methods(source)
        except RepoError as exc:
            raise ToolExecutionError(f"get_methods failed: {exc}") from exc
        except JavaParseError as exc:
            raise ToolExecutionError(f"cannot parse {paths[0]}: {exc}") from exc
        return json.dumps({
            "class_name": name,
            "path": paths[0],
            "methods": [
                {
                    "name": m.name,
                    "kind": m.kind,
                    "signature": m.signature,
                    "start_line": m.start_line,
                    "end_line": m.end_line,
                }
                for m in methods
            ],
        })

    def load_battleship_json(session, arguments) -> str:
        if session.inventory_loaded:
            raise ToolExecutionError(
                "inventory already loaded; subsequent calls of this method are disabled"
            )
        try:
            inventory = repo.load_class_inventory()
        except RepoError as exc:
            raise ToolExecutionError(f"load_battleship_json failed: {exc}") from exc
        session.inventory = inventory
        session.inventory_loaded = True
        return json.dumps({
            "loaded": True,
            "ref": inventory.snapshot_ref,
            "classes": inventory.total_classes(),
            "names": sorted(inventory.entries),
        })

    registry = ToolRegistry()
    registry.register(ToolSpec(
        name="find_class_path",
        description=(
            "Given a Java class simple name, return the repository path(s) of "
            "that class. Multiple paths mean the name is ambiguous."
        ),
        parameters=_object_schema({"class_name": {"type": "string"}}, ["class_name"]),
        handler=find_class_path,
    ))
    registry.register(ToolSpec(
        name="get_content_from_file",
        description=(
            "Retrieve and decode a repository file's content by path, with "
            "minimal header cleanup applied to leading license comments."
        ),
        parameters=_object_schema({"path": {"type": "string"}}, ["path"]),
        handler=get_content_from_file,
    ))
    registry.register(ToolSpec(
        name="get_methods",
        description=(
            "Enumerate the method and constructor declarations of a Java class "
            "by simple name, with signatures and line ranges. Use this to "
            "confirm a method exists before fetching the file."
        ),
        parameters=_object_schema({"class_name": {"type": "string"}}, ["class_name"]),
        handler=get_methods,
    ))
    registry.register(ToolSpec(
        name="load_battleship_json",
        description=(
            "Load the repository's class inventory once per session. "
            "Subsequent calls are disabled."
        ),
        parameters=_object_schema({}, []),
        handler=load_battleship_json,
    ))
    return registry
