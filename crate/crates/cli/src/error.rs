use pollgame::GameError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    /// 1 for domain outcomes, 2 for bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Game(GameError::InvalidParams(_) | GameError::InvalidWeights(_)) => 2,
            CliError::Game(_) | CliError::CheckFailed(_) => 1,
        }
    }
}
