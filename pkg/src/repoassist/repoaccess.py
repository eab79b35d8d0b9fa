"""Read-only repository access pinned to a fixed ref.

Two interchangeable backends sit behind RepoSnapshot: a GitLab-v4-compatible
provider API (GET endpoints only, paginated tree listing, base64 file
payloads) and a plain local directory. Responses are cached per snapshot;
the pinned ref makes the cache safe for the snapshot's whole lifetime.
"""
from __future__ import annotations

import base64
import binascii
import hashlib
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import quote

import requests

from .errors import DecodeError, ProviderUnavailable, RefNotFound, RepoFileNotFound

TREE_PER_PAGE = 100


@dataclass(frozen=True)
class FileEntry:
    path: str
    kind: str  # "file" | "directory"
    size_bytes: int | None = None  # files only; None when the provider omits it


@dataclass(frozen=True)
class FileContent:
    path: str
    text: str
    size_bytes: int
    sha256: str


@dataclass(frozen=True)
class ClassInventory:
    entries: dict[str, list[str]]
    snapshot_ref: str
    built_at: str

    def paths_for(self, class_name: str) -> list[str]:
        return list(self.entries.get(class_name, []))

    def total_classes(self) -> int:
        return len(self.entries)


def normalize_repo_path(path: str) -> str:
    """Forward slashes, no leading/trailing slash, no '.'/'..' segments."""
    cleaned = path.replace("\\", "/").strip("/")
    parts = [p for p in cleaned.split("/") if p]
    if any(p in (".", "..") for p in parts):
        raise ValueError(f"path {path!r} contains relative segments")
    return "/".join(parts)


class _LocalDirBackend:
    def __init__(self, root: Path):
        self.root = root

    def tree(self) -> list[FileEntry]:
        entries = []
        for p in self.root.rglob("*"):
            rel = p.relative_to(self.root).as_posix()
            if ".git" in rel.split("/"):
                continue
            if p.is_dir():
                entries.append(FileEntry(rel, "directory"))
            elif p.is_file():
                entries.append(FileEntry(rel, "file", p.stat().st_size))
        return sorted(entries, key=lambda e: e.path)

    def file_bytes(self, path: str) -> bytes:
        full = self.root / path
        if not full.is_file():
            raise RepoFileNotFound(path)
        return full.read_bytes()


class _RemoteApiBackend:
    """GitLab-v4-compatible read client. Only GET requests, ever."""

    def __init__(self, base_url: str, project_id: str, ref: str,
                 token_env: str = "GITLAB_TOKEN", session=None, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.project_id = quote(str(project_id), safe="")
        self.ref = ref
        self.timeout = timeout
        self._session = session or requests.Session()
        token = os.environ.get(token_env)
        self._headers = {"PRIVATE-TOKEN": token} if token else {}

    def _get(self, url: str, params: dict):
        try:
            return self._session.get(url, params=params, headers=self._headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise ProviderUnavailable(str(exc)) from exc

    def tree(self) -> list[FileEntry]:
        url = f"{self.base_url}/projects/{self.project_id}/repository/tree"
        entries: list[FileEntry] = []
        page = 1
        while True:
            resp = self._get(url, {"ref": self.ref, "recursive": "true",
                                   "per_page": TREE_PER_PAGE, "page": page})
            if resp.status_code == 404:
                raise RefNotFound(f"ref {self.ref!r} or project {self.project_id!r} not found")
            if resp.status_code != 200:
                raise ProviderUnavailable(f"tree listing returned {resp.status_code}")
            items = resp.json()
            for item in items:
                kind = "directory" if item.get("type") == "tree" else "file"
                size = item.get("size")
                entries.append(FileEntry(item["path"], kind, size if kind == "file" else None))
            next_page = resp.headers.get("X-Next-Page", "")
            if next_page:
                page = int(next_page)
            elif len(items) == TREE_PER_PAGE:
                page += 1
            else:
                break
        return sorted(entries, key=lambda e: e.path)

    def file_bytes(self, path: str) -> bytes:
        url = (f"{self.base_url}/projects/{self.project_id}"
               f"/repository/files/{quote(path, safe='')}")
        resp = self._get(url, {"ref": self.ref})
        if resp.status_code == 404:
            raise RepoFileNotFound(path)
        if resp.status_code != 200:
            raise ProviderUnavailable(f"file fetch returned {resp.status_code}")
        payload = resp.json()
        if payload.get("encoding") != "base64":
            raise DecodeError(f"unexpected payload encoding {payload.get('encoding')!r}")
        try:
            return base64.b64decode(payload["content"], validate=True)
        except (binascii.Error, ValueError) as exc:
            raise DecodeError(f"invalid base64 payload for {path}: {exc}") from exc


@dataclass
class RepoSnapshot:
    """Immutable read-only view of one repository at one ref.

    Safe for concurrent use; results are cached per (ref, path) for the
    snapshot's lifetime and no operation ever issues a write verb.
    """

    provider: str  # "remote-api" | "local-dir"
    project_id: str
    ref: str
    base_url: str | None = None
    _backend: object = field(default=None, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _tree_cache: list | None = field(default=None, repr=False)
    _file_cache: dict = field(default_factory=dict, repr=False)

    def _tree(self) -> list[FileEntry]:
        with self._lock:
            cached = self._tree_cache
        if cached is None:
            cached = self._backend.tree()
            with self._lock:
                if self._tree_cache is None:
                    self._tree_cache = cached
                cached = self._tree_cache
        return cached

    def list_tree(self, path_prefix: str | None = None) -> list[FileEntry]:
        """All entries at the pinned ref, recursively, sorted by path;
        optionally only those strictly under path_prefix."""
        tree = self._tree()
        if path_prefix is None:
            return list(tree)
        prefix = normalize_repo_path(path_prefix)
        if not prefix:
            return list(tree)
        return [e for e in tree if e.path.startswith(prefix + "/")]

    def find_class_path(self, class_name: str) -> list[str]:
        """Paths of files named exactly `<class_name>.java` (case-sensitive)."""
        if not class_name or "/" in class_name or "\\" in class_name:
            raise ValueError(f"invalid class name {class_name!r}")
        wanted = f"{class_name}.java"
        return sorted(
            e.path for e in self._tree()
            if e.kind == "file" and e.path.rsplit("/", 1)[-1] == wanted
        )

    def fetch_file(self, path: str) -> FileContent:
        """Decoded text plus byte length and content hash. No cleanup applied."""
        norm = normalize_repo_path(path)
        with self._lock:
            if norm in self._file_cache:
                return self._file_cache[norm]
        tree = self._tree()
        for e in tree:
            if e.path == norm:
                if e.kind != "file":
                    raise RepoFileNotFound(f"{norm} is a directory")
                break
        else:
            raise RepoFileNotFound(norm)
        raw = self._backend.file_bytes(norm)
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError(f"{norm} is not valid UTF-8: {exc}") from exc
        content = FileContent(norm, text, len(raw), hashlib.sha256(raw).hexdigest())
        with self._lock:
            self._file_cache.setdefault(norm, content)
        return content

    def load_class_inventory(self) -> ClassInventory:
        """Index every `*.java` file in the tree by its simple class name."""
        entries: dict[str, list[str]] = {}
        for e in self._tree():
            if e.kind == "file" and e.path.endswith(".java"):
                name = e.path.rsplit("/", 1)[-1][: -len(".java")]
                entries.setdefault(name, []).append(e.path)
        for paths in entries.values():
            paths.sort()
        return ClassInventory(
            entries=dict(sorted(entries.items())),
            snapshot_ref=self.ref,
            built_at=datetime.now(timezone.utc).isoformat(),
        )


def open_local_repo(root: str | Path, ref: str = "workdir") -> RepoSnapshot:
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"repository directory {root} does not exist")
    return RepoSnapshot(
        provider="local-dir",
        project_id=root.name,
        ref=ref,
        base_url=None,
        _backend=_LocalDirBackend(root),
    )


def open_remote_repo(base_url: str, project_id: str, ref: str,
                     token_env: str = "GITLAB_TOKEN", session=None) -> RepoSnapshot:
    return RepoSnapshot(
        provider="remote-api",
        project_id=str(project_id),
        ref=ref,
        base_url=base_url,
        _backend=_RemoteApiBackend(base_url, project_id, ref, token_env, session),
    )
