named_enum! {
    /// Script slots, in cross-grid row order. The order doubles as the
    /// discourse order used when scripts are listed.
    pub enum SlotType {
        RequestBeneficiary,
        OpeningGreeting,
        AddressTerm,
        ForumActivityDescription,
        Identity,
        ProblemPresentation,
        ResolutionFailure,
        PsychologicalState,
        HealthState,
        RequestFormulation,
        ExpectedBenefit,
        ExchangeModalities,
        CounterGiftWish,
        AnticipatoryThanks,
        Closing,
        Signature,
        ProverbQuotation,
        VisualFormatting,
    }
}

impl SlotType {
    pub const COUNT: usize = 18;

    /// Slots recurring in replies whatever their content: address terms,
    /// greetings, signatures, closings, smileys, proverbs.
    pub fn is_background(self) -> bool {
        matches!(
            self,
            SlotType::AddressTerm
                | SlotType::OpeningGreeting
                | SlotType::Signature
                | SlotType::Closing
                | SlotType::VisualFormatting
                | SlotType::ProverbQuotation
        )
    }
}

named_enum! {
    /// Content categories of replies.
    pub enum ReactionType {
        EncouragementCompliment,
        CriticismDisagreement,
        AdviceInformation,
        SituationEvaluationFollowupQuestion,
        ExpertiseEvaluationSharedExperience,
    }
}

impl ReactionType {
    pub const COUNT: usize = 5;
}

/// What a rule detects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Slot(SlotType),
    Reaction(ReactionType),
}

impl Target {
    pub fn from_name(name: &str) -> Option<Self> {
        SlotType::from_name(name)
            .map(Target::Slot)
            .or_else(|| ReactionType::from_name(name).map(Target::Reaction))
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::Slot(s) => s.name(),
            Target::Reaction(r) => r.name(),
        }
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
