export class AssetPrepError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

/** Segmentation found nothing usable in the image. */
export class NoSubjectError extends AssetPrepError {}

/** A model name was requested that the registry does not know. */
export class UnknownModelError extends AssetPrepError {}

/** An input file is not something we can decode. */
export class DecodeError extends AssetPrepError {}
