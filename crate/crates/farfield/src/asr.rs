pub mod placeholder_remove {}
// TEMP
