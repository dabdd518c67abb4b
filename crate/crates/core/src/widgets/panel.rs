use std::collections::BTreeMap;

use super::WidgetError;
use crate::spatial::{NodeId, Pose, Vec3};

/// A grid of cells hosting child widgets, moved around by its handle.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    node_id: NodeId,
    handle_node_id: NodeId,
    columns: u32,
    rows: u32,
    cell_size: f64,
    opacity: f64,
    cells: BTreeMap<(u32, u32), NodeId>,
}

impl Panel {
    pub fn new(
        node_id: NodeId,
        handle_node_id: NodeId,
        columns: u32,
        rows: u32,
        cell_size: f64,
    ) -> Result<Self, WidgetError> {
        if columns == 0 || rows == 0 {
            return Err(WidgetError::InvalidConfig("panel grid must have at least one cell"));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(WidgetError::InvalidConfig("cell size must be positive"));
        }
        Ok(Self {
            node_id,
            handle_node_id,
            columns,
            rows,
            cell_size,
            opacity: 1.0,
            cells: BTreeMap::new(),
        })
    }

    pub fn node_id(&self) -> NodeId {
        self.node_id
    }

    pub fn handle_node_id(&self) -> NodeId {
        self.handle_node_id
    }

    pub fn grid(&self) -> (u32, u32) {
        (self.columns, self.rows)
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn opacity(&self) -> f64 {
        self.opacity
    }

    pub fn occupant(&self, column: u32, row: u32) -> Option<NodeId> {
        self.cells.get(&(column, row)).copied()
    }

    /// Local pose at the center of a cell; row 0 is the top row.
    pub fn slot_pose(&self, column: u32, row: u32) -> Result<Pose, WidgetError> {
        if column >= self.columns || row >= self.rows {
            return Err(WidgetError::SlotOutOfRange {
                column,
                row,
                columns: self.columns,
                rows: self.rows,
            });
        }
        let x = (column as f64 - (self.columns as f64 - 1.0) / 2.0) * self.cell_size;
        let y = ((self.rows as f64 - 1.0) / 2.0 - row as f64) * self.cell_size;
        Ok(Pose::from_translation(Vec3::new(x, y, 0.0)))
    }

    /// Reserves a cell for `child` and returns its local pose.
    pub fn place(&mut self, child: NodeId, column: u32, row: u32) -> Result<Pose, WidgetError> {
        let pose = self.slot_pose(column, row)?;
        if let Some(existing) = self.occupant(column, row) {
            return Err(WidgetError::CellOccupied { column, row, existing });
        }
        self.cells.insert((column, row), child);
        Ok(pose)
    }

    pub fn set_opacity(&mut self, value: f64) {
        self.opacity = if value.is_nan() { 1.0 } else { value.clamp(0.0, 1.0) };
    }
}

/// Free-function form of [`Panel::slot_pose`].
pub fn panel_slot_pose(panel: &Panel, column: u32, row: u32) -> Result<Pose, WidgetError> {
    panel.slot_pose(column, row)
}

/// Returns the panel with its opacity clamped into `[0, 1]`.
pub fn set_opacity(mut panel: Panel, value: f64) -> Panel {
    panel.set_opacity(value);
    panel
}
