"""Generate one code reference page per public module of the package named in `pyproject.toml`."""

import ast
from pathlib import Path

import mkdocs_gen_files
from corallium.tomllib import tomllib


def documented_names(source: str) -> list[str]:
    """Public top-level classes and functions in `source`.

    Returns:
        list[str]: names in source order

    """
    nodes = ast.parse(source).body
    kinds = (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)
    return [node.name for node in nodes if isinstance(node, kinds) and not node.name.startswith('_')]


_config = tomllib.loads(Path('pyproject.toml').read_text(encoding='utf-8'))
_pkg_name = _config['tool']['poetry']['name']
for path in sorted(Path(_pkg_name).rglob('*.py')):
    module_path = path.with_suffix('')
    parts = tuple(module_path.parts)
    if parts[-1] == '__init__':
        parts = parts[:-1]
        full_doc_path = Path('reference', *parts, 'index.md')
    elif parts[-1].startswith('_'):
        continue
    else:
        full_doc_path = Path('reference', path.with_suffix('.md'))
    if not documented_names(path.read_text(encoding='utf-8')):
        continue

    with mkdocs_gen_files.open(full_doc_path, 'w') as fd:
        fd.write(f'::: {".".join(parts)}')
    mkdocs_gen_files.set_edit_path(full_doc_path, path)
