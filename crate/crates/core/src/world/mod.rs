//! Terrain layouts, park state and the geometry rules placement and excitement depend on.

pub mod geometry;
pub mod layout;
pub mod placement;
pub mod state;

pub use geometry::Geometry;
pub use layout::{load_layout, Layout, LayoutError, Pos, Tile, EVALUATION_LAYOUTS, GRID, TRAINING_LAYOUTS};
pub use placement::{effective_excitement, placement_legal, reachable_attractions, Violation};
pub use state::{
    new_park, park_id, AttractionDay, Difficulty, ParkState, PlacedEntity, ResearchState, StaffDay, StaffMember,
    SurveyCache, SurveyRecord,
};
