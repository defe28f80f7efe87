"""
cwgeom Tools Package
Workspace model, exact predicates, constrained heap and hull, and the
triangulation and Voronoi pipelines. Import the pipelines from their
modules; only the workspace model is re-exported here.
"""

from .workspace_harness import (
    AuditReport,
    CwGeomError,
    OutputSink,
    ReadOnlyArray,
    WorkspaceBudget,
    WorkspaceRun,
    audit_report,
)

__all__ = [
    'AuditReport',
    'CwGeomError',
    'OutputSink',
    'ReadOnlyArray',
    'WorkspaceBudget',
    'WorkspaceRun',
    'audit_report'
]
