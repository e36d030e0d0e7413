// Wire types for the /v1 session API. The server never sends answer
// keys: question payloads have no expected answer, hidden map cells have
// text null, cloze blanks are ids only.

export interface QuestionView {
  id: string;
  kind: string;
  text: string;
}

export interface TutorTurn {
  speech: string[];
  feedback: string | null;
  solidarity: string | null;
  question: QuestionView | null;
  mediaReveals: string[];
  mediaDirective: 'clear' | 'reset' | null;
  phaseHint: string;
  seq?: number | null;
}

export interface MapCell {
  slotId: string;
  role: 'node' | 'edge';
  blanked: boolean;
  filled: boolean;
  text: string | null;
}

export interface MapTriple {
  subject: MapCell;
  relation: MapCell;
  object: MapCell;
}

export interface ConceptMapPayload {
  kind: 'conceptMap';
  mapId: string;
  mapIndex: number;
  mapCount: number;
  triples: MapTriple[];
  nodeBank: string[];
  edgeBank: string[];
}

export interface ClozeBlank {
  blankId: string;
  submitted: boolean;
}

export interface ClozePayload {
  kind: 'cloze';
  passage: string;
  blanks: ClozeBlank[];
}

export type TaskPayload = ConceptMapPayload | ClozePayload;

export interface SessionView {
  sessionId: string;
  phase: string;
  pendingQuestion: QuestionView | null;
  mediaVisible: string[];
  taskPayload: TaskPayload | null;
  progress: number;
  wrapUp: boolean;
}

export interface TurnResponse {
  tutorTurns: TutorTurn[];
  view: SessionView;
}

export interface MapEntryResponse {
  accepted: boolean;
  bankEntryRemoved: string | null;
  complete: boolean;
  bankRemaining: number;
  tutorTurns: TutorTurn[];
  view: SessionView;
}

export interface TaskAckResponse {
  status: 'recorded';
  remaining: number;
  tutorTurns: TutorTurn[];
  view: SessionView;
}

export interface TopicSummary {
  id: string;
  name: string;
  preview: string;
  conceptCount: number;
}

export interface TestItemView {
  itemId: string;
  stem: string;
  options: string[];
}

export interface TestView {
  testId: string;
  kind: string;
  items: TestItemView[];
}

export interface ErrorBody {
  code: string;
  message: string;
}

export type TranscriptEntry =
  | { role: 'tutor'; kind: 'speech'; text: string; seq: number }
  | { role: 'tutor'; kind: 'feedback'; level: string; solidarity: string | null; seq: number }
  | { role: 'tutor'; kind: 'question'; question: QuestionView; seq: number }
  | { role: 'student'; kind: 'speech'; text: string; seq: number };
