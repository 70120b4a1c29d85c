pub mod caratheodory;
pub mod net;
pub mod selection;
pub mod tverberg;
